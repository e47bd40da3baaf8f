//! Clause view of a grounded program restricted to its free atoms.

use crate::error::{Error, Result};
use crate::logic::{AtomId, GroundedProgram, Weight};

/// A ground rule as a disjunction over free atoms: satisfied when any
/// literal `(atom, want)` has `value == want`.
#[derive(Clone, Debug)]
pub struct Clause {
    pub lits: Vec<(u32, bool)>,
    pub weight: f64,
    pub hard: bool,
    pub rule: usize,
}

impl Clause {
    #[inline]
    pub fn satisfied(&self, values: &[bool]) -> bool {
        self.lits.iter().any(|&(a, want)| values[a as usize] == want)
    }
}

#[derive(Clone, Debug)]
pub struct Component {
    /// Local atom indices, ascending.
    pub atoms: Vec<u32>,
    /// Clause indices, ascending.
    pub clauses: Vec<u32>,
    /// Source rules touched by the component, ascending.
    pub rules: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub num_rules: usize,
    /// Local index -> program atom.
    pub free: Vec<AtomId>,
    pub local_of: Vec<Option<u32>>,
    /// Unary log-odds per free atom (from soft evidence).
    pub bias: Vec<f64>,
    pub clauses: Vec<Clause>,
    pub atom_clauses: Vec<Vec<u32>>,
    /// Values of atoms fixed by hard evidence.
    pub fixed: Vec<Option<bool>>,
    /// Groundings per rule satisfied whatever the free atoms do.
    pub const_counts: Vec<f64>,
    pub components: Vec<Component>,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

impl Compiled {
    pub fn new(program: &GroundedProgram) -> Result<Self> {
        let n = program.num_atoms();
        let num_rules = program.num_first_order_rules();
        for (i, w) in program.weights().iter().enumerate() {
            if let Weight::Soft(v) = w {
                if !v.is_finite() {
                    return Err(Error::Config(format!("rule {i} has non-finite weight {v}")));
                }
            }
        }
        let mut free = Vec::new();
        let mut local_of = vec![None; n];
        let mut fixed = vec![None; n];
        let mut bias = Vec::new();
        for a in 0..n {
            match program.hard_value(a) {
                Some(v) => fixed[a] = Some(v),
                None => {
                    local_of[a] = Some(free.len() as u32);
                    free.push(a);
                    bias.push(program.evidence(a).map_or(0.0, logit));
                }
            }
        }

        let mut clauses = Vec::new();
        let mut const_counts = vec![0.0; num_rules];
        'rules: for (g, r) in program.rules().iter().enumerate() {
            let weight = program.weight_of(g);
            let mut lits: Vec<(u32, bool)> = Vec::new();
            // body => head  ==  !b1 | ... | !bk | head
            let disjuncts = r
                .body
                .iter()
                .map(|l| (l.atom, l.negated))
                .chain(std::iter::once((r.head.atom, !r.head.negated)));
            for (atom, want) in disjuncts {
                match fixed[atom] {
                    Some(v) if v == want => {
                        const_counts[r.rule] += 1.0;
                        continue 'rules;
                    }
                    Some(_) => {}
                    None => {
                        let local = local_of[atom].expect("free atom");
                        match lits.iter().find(|(a, _)| *a == local) {
                            Some(&(_, w)) if w != want => {
                                const_counts[r.rule] += 1.0;
                                continue 'rules;
                            }
                            Some(_) => {}
                            None => lits.push((local, want)),
                        }
                    }
                }
            }
            if lits.is_empty() {
                if weight.is_hard() {
                    return Err(Error::Infeasible(format!(
                        "evidence violates hard rule `{}`",
                        program.rule_text(r.rule)
                    )));
                }
                continue;
            }
            clauses.push(Clause {
                lits,
                weight: weight.value().unwrap_or(0.0),
                hard: weight.is_hard(),
                rule: r.rule,
            });
        }

        let mut atom_clauses = vec![Vec::new(); free.len()];
        for (c, clause) in clauses.iter().enumerate() {
            for &(a, _) in &clause.lits {
                atom_clauses[a as usize].push(c as u32);
            }
        }
        let components = components(free.len(), &clauses, &atom_clauses);
        Ok(Compiled {
            num_rules,
            free,
            local_of,
            bias,
            clauses,
            atom_clauses,
            fixed,
            const_counts,
            components,
        })
    }

    /// Replaces soft clause weights with `weights[rule]`.
    pub fn set_weights(&mut self, weights: &[f64]) {
        for c in &mut self.clauses {
            if !c.hard {
                c.weight = weights[c.rule];
            }
        }
    }

    /// Log weight of a local assignment over all clauses and biases.
    pub fn score(&self, values: &[bool]) -> f64 {
        let mut s: f64 = self
            .bias
            .iter()
            .zip(values)
            .filter(|(_, &v)| v)
            .map(|(b, _)| b)
            .sum();
        for c in &self.clauses {
            if c.satisfied(values) {
                s += c.weight;
            } else if c.hard {
                return f64::NEG_INFINITY;
            }
        }
        s
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    /// Soft-rule score of a local assignment restricted to one component,
    /// `-inf` when a hard clause fails.
    pub fn component_score(&self, comp: &Component, values: &[bool]) -> f64 {
        let mut s = 0.0;
        for &a in &comp.atoms {
            if values[a as usize] {
                s += self.bias[a as usize];
            }
        }
        for &c in &comp.clauses {
            let clause = &self.clauses[c as usize];
            if clause.satisfied(values) {
                s += clause.weight;
            } else if clause.hard {
                return f64::NEG_INFINITY;
            }
        }
        s
    }

    /// Satisfied clause counts per source rule for a local assignment,
    /// excluding the constant part.
    pub fn counts(&self, values: &[bool]) -> Vec<f64> {
        let mut n = vec![0.0; self.num_rules];
        for c in &self.clauses {
            if c.satisfied(values) {
                n[c.rule] += 1.0;
            }
        }
        n
    }

    /// Local assignment read from a full program world.
    pub fn localize(&self, world: &[bool]) -> Vec<bool> {
        self.free.iter().map(|&a| world[a]).collect()
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

fn components(n: usize, clauses: &[Clause], atom_clauses: &[Vec<u32>]) -> Vec<Component> {
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for c in clauses {
        let first = c.lits[0].0;
        for &(a, _) in &c.lits[1..] {
            let (ra, rb) = (find(&mut parent, first), find(&mut parent, a));
            if ra != rb {
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                parent[hi as usize] = lo;
            }
        }
    }
    let mut slot: Vec<Option<usize>> = vec![None; n];
    let mut out: Vec<Component> = Vec::new();
    for a in 0..n as u32 {
        let root = find(&mut parent, a) as usize;
        let idx = *slot[root].get_or_insert_with(|| {
            out.push(Component {
                atoms: Vec::new(),
                clauses: Vec::new(),
                rules: Vec::new(),
            });
            out.len() - 1
        });
        out[idx].atoms.push(a);
    }
    for comp in &mut out {
        let mut cl: Vec<u32> = comp
            .atoms
            .iter()
            .flat_map(|&a| atom_clauses[a as usize].iter().copied())
            .collect();
        cl.sort_unstable();
        cl.dedup();
        let mut rules: Vec<usize> = cl.iter().map(|&c| clauses[c as usize].rule).collect();
        rules.sort_unstable();
        rules.dedup();
        comp.clauses = cl;
        comp.rules = rules;
    }
    out
}

/// A component re-indexed to dense local atoms `0..k` and local rules
/// `0..comp.rules.len()`.
#[derive(Clone, Debug)]
pub struct Sub {
    pub k: usize,
    pub bias: Vec<f64>,
    pub clauses: Vec<SubClause>,
    /// Per atom: (clause, wanted value).
    pub occurs: Vec<Vec<(u32, bool)>>,
    pub num_rules: usize,
}

#[derive(Clone, Debug)]
pub struct SubClause {
    pub lits: Vec<(u32, bool)>,
    pub weight: f64,
    pub hard: bool,
    pub rule: u32,
}

impl SubClause {
    #[inline]
    pub fn satisfied(&self, values: &[bool]) -> bool {
        self.lits.iter().any(|&(a, want)| values[a as usize] == want)
    }
}

impl Sub {
    pub fn new(compiled: &Compiled, comp: &Component) -> Self {
        let k = comp.atoms.len();
        let pos = |a: u32| comp.atoms.binary_search(&a).expect("atom in component") as u32;
        let clauses: Vec<SubClause> = comp
            .clauses
            .iter()
            .map(|&c| {
                let cl = &compiled.clauses[c as usize];
                SubClause {
                    lits: cl.lits.iter().map(|&(a, w)| (pos(a), w)).collect(),
                    weight: cl.weight,
                    hard: cl.hard,
                    rule: comp.rules.binary_search(&cl.rule).expect("rule in component") as u32,
                }
            })
            .collect();
        let mut occurs = vec![Vec::new(); k];
        for (c, cl) in clauses.iter().enumerate() {
            for &(a, w) in &cl.lits {
                occurs[a as usize].push((c as u32, w));
            }
        }
        Sub {
            k,
            bias: comp.atoms.iter().map(|&a| compiled.bias[a as usize]).collect(),
            clauses,
            occurs,
            num_rules: comp.rules.len(),
        }
    }

    /// Log weight of a local assignment, `-inf` on a violated hard clause.
    pub fn score(&self, values: &[bool]) -> f64 {
        let mut s: f64 = (0..self.k).filter(|&a| values[a]).map(|a| self.bias[a]).sum();
        for c in &self.clauses {
            if c.satisfied(values) {
                s += c.weight;
            } else if c.hard {
                return f64::NEG_INFINITY;
            }
        }
        s
    }

    pub fn counts(&self, values: &[bool], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for c in &self.clauses {
            if c.satisfied(values) {
                out[c.rule as usize] += 1.0;
            }
        }
    }
}
