//! Grounding of weighted first-order rules into a propositional program.
//!
//! Substitutions are enumerated by a backtracking join. Positive body
//! literals over closed-world predicates act as generators: only their
//! listed (non-false) atoms are visited, since any other substitution makes
//! the body false and the ground rule trivially satisfied. With pruning
//! enabled those trivially satisfied ground rules are never emitted.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;

use super::{EvidenceMap, KnowledgeBase, Literal, Role, Rule, RuleId, Term, Weight, ENTITY_SORT};
use crate::error::{Error, Result};

pub type AtomId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: Vec<String>) -> Self {
        GroundAtom {
            predicate: predicate.into(),
            args,
        }
    }

    /// Convenience constructor from string slices.
    pub fn of(predicate: &str, args: &[&str]) -> Self {
        GroundAtom::new(predicate, args.iter().map(|s| s.to_string()).collect())
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.predicate, self.args.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroundLiteral {
    pub atom: AtomId,
    pub negated: bool,
}

impl GroundLiteral {
    pub fn pos(atom: AtomId) -> Self {
        GroundLiteral {
            atom,
            negated: false,
        }
    }

    pub fn neg(atom: AtomId) -> Self {
        GroundLiteral {
            atom,
            negated: true,
        }
    }

    #[inline]
    pub fn holds(self, value: bool) -> bool {
        value != self.negated
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundRule {
    /// Index of the first-order rule this instance came from.
    pub rule: RuleId,
    pub body: Vec<GroundLiteral>,
    pub head: GroundLiteral,
}

impl GroundRule {
    pub fn literals(&self) -> impl Iterator<Item = GroundLiteral> + '_ {
        self.body.iter().copied().chain(std::iter::once(self.head))
    }

    /// Boolean implication semantics over a total assignment.
    #[inline]
    pub fn satisfied_by(&self, values: &[bool]) -> bool {
        !self.body.iter().all(|l| l.holds(values[l.atom])) || self.head.holds(values[self.head.atom])
    }
}

#[derive(Clone, Debug)]
pub struct GroundingOptions {
    /// Skip ground rules already satisfied by hard evidence and soft rules
    /// whose atoms are all evidence.
    pub prune: bool,
    /// Drop instances whose category-scoped atoms span several categories.
    pub cutoff: bool,
}

impl Default for GroundingOptions {
    fn default() -> Self {
        GroundingOptions {
            prune: true,
            cutoff: true,
        }
    }
}

/// Ground atoms, ground rules and evidence shared by the MLN and PSL engines.
/// Immutable once built; cheap to share across threads.
#[derive(Clone, Debug)]
pub struct GroundedProgram {
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, AtomId>,
    roles: Vec<Role>,
    evidence: Vec<Option<f64>>,
    rules: Vec<GroundRule>,
    weights: Vec<Weight>,
    rule_text: Vec<String>,
    atom_rules: Vec<Vec<usize>>,
    arg_sorts: BTreeMap<String, Vec<String>>,
}

impl GroundedProgram {
    pub fn atoms(&self) -> &[GroundAtom] {
        &self.atoms
    }

    pub fn atom(&self, id: AtomId) -> &GroundAtom {
        &self.atoms[id]
    }

    pub fn atom_id(&self, atom: &GroundAtom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn role(&self, id: AtomId) -> Role {
        self.roles[id]
    }

    pub fn evidence(&self, id: AtomId) -> Option<f64> {
        self.evidence[id]
    }

    /// Evidence value when it is exactly 0 or 1.
    pub fn hard_value(&self, id: AtomId) -> Option<bool> {
        match self.evidence[id] {
            Some(0.0) => Some(false),
            Some(1.0) => Some(true),
            _ => None,
        }
    }

    pub fn rules(&self) -> &[GroundRule] {
        &self.rules
    }

    pub fn num_first_order_rules(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    /// Weight of the first-order rule behind ground rule `g`.
    #[inline]
    pub fn weight_of(&self, g: usize) -> Weight {
        self.weights[self.rules[g].rule]
    }

    pub fn rule_text(&self, rule: RuleId) -> &str {
        &self.rule_text[rule]
    }

    /// Ground rules mentioning `atom`.
    pub fn rules_of(&self, atom: AtomId) -> &[usize] {
        &self.atom_rules[atom]
    }

    pub fn arg_sorts(&self, predicate: &str) -> Option<&[String]> {
        self.arg_sorts.get(predicate).map(Vec::as_slice)
    }

    /// Atoms without hard evidence.
    pub fn free_atoms(&self) -> Vec<AtomId> {
        (0..self.atoms.len())
            .filter(|&a| self.hard_value(a).is_none())
            .collect()
    }

    /// Ground rule count per first-order rule.
    pub fn groundings_per_rule(&self) -> Vec<usize> {
        let mut counts = vec![0; self.weights.len()];
        for r in &self.rules {
            counts[r.rule] += 1;
        }
        counts
    }

    pub fn with_weights(&self, weights: &[Weight]) -> Result<Self> {
        if weights.len() != self.weights.len() {
            return Err(Error::Data(format!(
                "expected {} weights, got {}",
                self.weights.len(),
                weights.len()
            )));
        }
        let mut out = self.clone();
        out.weights = weights.to_vec();
        Ok(out)
    }

    /// Copy with some evidence values replaced (`None` opens the atom).
    pub fn with_evidence(&self, updates: &[(AtomId, Option<f64>)]) -> Result<Self> {
        let mut out = self.clone();
        for &(a, v) in updates {
            if a >= out.atoms.len() {
                return Err(Error::AtomMissing(a));
            }
            if let Some(v) = v {
                check_unit(&out.atoms[a].to_string(), v)?;
            }
            out.evidence[a] = v;
        }
        Ok(out)
    }

    /// Copy keeping only the ground rules accepted by `keep`; atoms and
    /// evidence are unchanged.
    pub fn restrict_rules(&self, mut keep: impl FnMut(&GroundRule) -> bool) -> Self {
        let mut out = self.clone();
        out.rules.retain(|r| keep(r));
        out.atom_rules = vec![Vec::new(); out.atoms.len()];
        for (g, r) in out.rules.iter().enumerate() {
            for l in r.literals() {
                let list = &mut out.atom_rules[l.atom];
                if list.last() != Some(&g) {
                    list.push(g);
                }
            }
        }
        out
    }

    /// Copy in which first-order rule `r` is renamed to `group[r]`, so rules
    /// in one group share a weight. Each group takes the weight and text of
    /// its first member; members must agree on being hard.
    pub fn tie_rules(&self, group: &[RuleId]) -> Result<Self> {
        if group.len() != self.weights.len() {
            return Err(Error::Data(format!(
                "tie map has {} entries for {} rules",
                group.len(),
                self.weights.len()
            )));
        }
        let n_groups = group.iter().max().map_or(0, |m| m + 1);
        let mut weights: Vec<Option<Weight>> = vec![None; n_groups];
        let mut text = vec![String::new(); n_groups];
        for (r, &g) in group.iter().enumerate() {
            match weights[g] {
                None => {
                    weights[g] = Some(self.weights[r]);
                    text[g].clone_from(&self.rule_text[r]);
                }
                Some(w) if w.is_hard() != self.weights[r].is_hard() => {
                    return Err(Error::Data(format!("tied group {g} mixes hard and soft rules")));
                }
                Some(_) => {}
            }
        }
        let mut out = self.clone();
        out.weights = weights
            .into_iter()
            .enumerate()
            .map(|(g, w)| w.ok_or_else(|| Error::Data(format!("tied group {g} is empty"))))
            .collect::<Result<_>>()?;
        out.rule_text = text;
        for r in out.rules.iter_mut() {
            r.rule = group[r.rule];
        }
        Ok(out)
    }

    /// Constants of sort `sort` appearing in the arguments of `atom`.
    pub fn constants_of_sort<'a>(&'a self, atom: AtomId, sort: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        let a = &self.atoms[atom];
        let sorts = self.arg_sorts.get(&a.predicate);
        a.args.iter().enumerate().filter_map(move |(i, c)| {
            sorts
                .and_then(|s| s.get(i))
                .filter(|s| s.as_str() == sort)
                .map(|_| c.as_str())
        })
    }
}

fn check_unit(what: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: what.to_string(),
            value: v,
        })
    }
}

/// Assembles a [`GroundedProgram`] directly from propositional pieces.
#[derive(Debug, Default)]
pub struct ProgramBuilder {
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, AtomId>,
    roles: Vec<Role>,
    evidence: Vec<Option<f64>>,
    rules: Vec<GroundRule>,
    weights: Vec<Weight>,
    rule_text: Vec<String>,
    arg_sorts: BTreeMap<String, Vec<String>>,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns an atom (idempotent).
    pub fn atom(&mut self, atom: GroundAtom, role: Role) -> AtomId {
        if let Some(&id) = self.index.get(&atom) {
            return id;
        }
        let id = self.atoms.len();
        self.index.insert(atom.clone(), id);
        self.atoms.push(atom);
        self.roles.push(role);
        self.evidence.push(None);
        id
    }

    /// Interns a nullary-looking proposition `name()` as a query atom.
    pub fn prop(&mut self, name: &str) -> AtomId {
        self.atom(GroundAtom::new(name, Vec::new()), Role::Query)
    }

    pub fn evidence(&mut self, atom: AtomId, value: f64) -> Result<&mut Self> {
        check_unit(&self.atoms[atom].to_string(), value)?;
        self.evidence[atom] = Some(value);
        Ok(self)
    }

    pub fn sorts(&mut self, predicate: &str, sorts: &[&str]) -> &mut Self {
        self.arg_sorts.insert(
            predicate.to_string(),
            sorts.iter().map(|s| s.to_string()).collect(),
        );
        self
    }

    /// Declares a first-order rule slot and returns its id.
    pub fn rule(&mut self, weight: Weight, text: impl Into<String>) -> RuleId {
        self.weights.push(weight);
        self.rule_text.push(text.into());
        self.weights.len() - 1
    }

    pub fn ground(&mut self, rule: RuleId, body: Vec<GroundLiteral>, head: GroundLiteral) -> &mut Self {
        self.rules.push(GroundRule { rule, body, head });
        self
    }

    /// Shorthand: a fresh first-order rule with a single grounding.
    pub fn clause(&mut self, weight: Weight, body: Vec<GroundLiteral>, head: GroundLiteral) -> RuleId {
        let text = format!("clause#{}", self.weights.len());
        let id = self.rule(weight, text);
        self.ground(id, body, head);
        id
    }

    pub fn build(self) -> Result<GroundedProgram> {
        let n = self.atoms.len();
        let mut atom_rules = vec![Vec::new(); n];
        for (g, r) in self.rules.iter().enumerate() {
            if r.rule >= self.weights.len() {
                return Err(Error::UnknownRule(r.rule));
            }
            for l in r.literals() {
                if l.atom >= n {
                    return Err(Error::AtomMissing(l.atom));
                }
                let list: &mut Vec<usize> = &mut atom_rules[l.atom];
                if list.last() != Some(&g) {
                    list.push(g);
                }
            }
        }
        Ok(GroundedProgram {
            atoms: self.atoms,
            index: self.index,
            roles: self.roles,
            evidence: self.evidence,
            rules: self.rules,
            weights: self.weights,
            rule_text: self.rule_text,
            atom_rules,
            arg_sorts: self.arg_sorts,
        })
    }
}

pub fn ground(kb: &KnowledgeBase, evidence: &EvidenceMap) -> Result<GroundedProgram> {
    ground_with(kb, evidence, &GroundingOptions::default(), &[])
}

/// Grounds every rule of `kb`. Atoms in `open_atoms` are materialized and
/// kept open even when their predicate is closed-world; evidence wins over
/// them when both mention the same atom.
pub fn ground_with(
    kb: &KnowledgeBase,
    evidence: &EvidenceMap,
    opts: &GroundingOptions,
    open_atoms: &[GroundAtom],
) -> Result<GroundedProgram> {
    for (atom, &v) in evidence {
        check_atom(kb, atom)?;
        check_unit(&atom.to_string(), v)?;
    }
    for atom in open_atoms {
        check_atom(kb, atom)?;
    }
    let facts = Facts::new(kb, evidence, open_atoms);

    let per_rule: Vec<Result<Vec<GroundClause>>> = kb
        .rules()
        .par_iter()
        .map(|rule| ground_rule(kb, rule, &facts, opts))
        .collect();

    let mut b = ProgramBuilder::new();
    for (atom, &v) in evidence {
        let role = kb.schema(&atom.predicate).map(|s| s.role).unwrap_or(Role::Evidence);
        let id = b.atom(atom.clone(), role);
        b.evidence[id] = Some(v);
    }
    for atom in open_atoms {
        let role = kb.schema(&atom.predicate).map(|s| s.role).unwrap_or(Role::Query);
        b.atom(atom.clone(), role);
    }
    for rule in kb.rules() {
        b.rule(rule.weight, rule.to_string());
    }
    for schema in kb.schemas() {
        b.arg_sorts
            .insert(schema.name.clone(), schema.arg_types.clone());
    }
    for (rule_id, grounded) in per_rule.into_iter().enumerate() {
        for lits in grounded? {
            let mut ids = Vec::with_capacity(lits.len());
            for (atom, negated) in lits {
                let schema = kb
                    .schema(&atom.predicate)
                    .ok_or_else(|| Error::UnknownPredicate(atom.predicate.clone()))?;
                let role = schema.role;
                let fresh = !b.index.contains_key(&atom);
                let id = b.atom(atom, role);
                if fresh && role.is_closed_world() && !facts.open.contains(&b.atoms[id]) {
                    b.evidence[id] = Some(0.0);
                }
                ids.push(GroundLiteral { atom: id, negated });
            }
            let head = ids.pop().expect("rule has a head");
            b.ground(rule_id, ids, head);
        }
    }
    b.build()
}

fn check_atom(kb: &KnowledgeBase, atom: &GroundAtom) -> Result<()> {
    let schema = kb
        .schema(&atom.predicate)
        .ok_or_else(|| Error::UnknownPredicate(atom.predicate.clone()))?;
    if schema.arity() != atom.args.len() {
        return Err(Error::Arity {
            predicate: atom.predicate.clone(),
            expected: schema.arity(),
            found: atom.args.len(),
        });
    }
    for (c, sort) in atom.args.iter().zip(&schema.arg_types) {
        if !kb.has_constant(sort, c) {
            return Err(Error::Type(format!(
                "`{c}` in {atom} is not a declared `{sort}` constant"
            )));
        }
    }
    if schema.irreflexive && has_repeat(&atom.args) {
        return Err(Error::Type(format!("{atom} violates irreflexive `{}`", schema.name)));
    }
    Ok(())
}

fn has_repeat(args: &[String]) -> bool {
    args.iter()
        .enumerate()
        .any(|(i, a)| args[i + 1..].contains(a))
}

/// Evidence lookup structures shared by all rule groundings.
struct Facts<'a> {
    kb: &'a KnowledgeBase,
    evidence: &'a EvidenceMap,
    open: HashSet<GroundAtom>,
    /// Candidate (possibly true) atoms per closed-world predicate.
    candidates: HashMap<&'a str, Vec<&'a GroundAtom>>,
    /// (predicate, arg position, constant) -> indices into `candidates`.
    by_arg: HashMap<(&'a str, usize, &'a str), Vec<usize>>,
}

impl<'a> Facts<'a> {
    fn new(kb: &'a KnowledgeBase, evidence: &'a EvidenceMap, open_atoms: &'a [GroundAtom]) -> Self {
        let mut candidates: HashMap<&str, Vec<&GroundAtom>> = HashMap::new();
        let open: HashSet<GroundAtom> = open_atoms
            .iter()
            .filter(|a| !evidence.contains_key(*a))
            .cloned()
            .collect();
        let listed = evidence
            .iter()
            .filter(|(_, &v)| v > 0.0)
            .map(|(a, _)| a)
            .chain(open_atoms.iter().filter(|a| !evidence.contains_key(*a)));
        for atom in listed {
            let closed = kb
                .schema(&atom.predicate)
                .is_some_and(|s| s.role.is_closed_world());
            if closed {
                candidates.entry(atom.predicate.as_str()).or_default().push(atom);
            }
        }
        let mut by_arg: HashMap<(&str, usize, &str), Vec<usize>> = HashMap::new();
        for (pred, list) in &candidates {
            for (i, atom) in list.iter().enumerate() {
                for (pos, c) in atom.args.iter().enumerate() {
                    by_arg.entry((pred, pos, c.as_str())).or_default().push(i);
                }
            }
        }
        Facts {
            kb,
            evidence,
            open,
            candidates,
            by_arg,
        }
    }

    /// Truth value fixed by hard evidence or the closed-world default.
    fn fixed(&self, atom: &GroundAtom) -> Option<bool> {
        match self.evidence.get(atom) {
            Some(0.0) => Some(false),
            Some(1.0) => Some(true),
            Some(_) => None,
            None => {
                let closed = self
                    .kb
                    .schema(&atom.predicate)
                    .is_some_and(|s| s.role.is_closed_world());
                if closed && !self.open.contains(atom) {
                    Some(false)
                } else {
                    None
                }
            }
        }
    }
}

struct RulePlan<'r> {
    rule: &'r Rule,
    /// Literals in visiting order: (literal, is_head, is_generator).
    order: Vec<(&'r Literal, bool, bool)>,
    vars: Vec<String>,
    var_sorts: Vec<String>,
    domains: Vec<Vec<String>>,
    distinct: bool,
    hard: bool,
}

/// `(atom, negated)` per literal of one grounding, head last.
type GroundClause = Vec<(GroundAtom, bool)>;

fn ground_rule(
    kb: &KnowledgeBase,
    rule: &Rule,
    facts: &Facts<'_>,
    opts: &GroundingOptions,
) -> Result<Vec<GroundClause>> {
    let sorts = kb.check_rule(rule)?;
    let vars = rule.variables();
    let mut var_sorts = Vec::with_capacity(vars.len());
    let mut domains = Vec::with_capacity(vars.len());
    for v in &vars {
        let sort = sorts[v].clone();
        let dom: Vec<String> = kb.constants(&sort).into_iter().map(String::from).collect();
        if dom.is_empty() {
            return Err(Error::EmptySort {
                var: v.clone(),
                sort,
            });
        }
        var_sorts.push(sort);
        domains.push(dom);
    }

    let is_generator = |lit: &Literal| {
        opts.prune
            && !lit.negated
            && kb
                .schema(&lit.predicate)
                .is_some_and(|s| s.role.is_closed_world())
    };
    let mut order: Vec<(&Literal, bool, bool)> = Vec::new();
    for lit in &rule.body {
        if is_generator(lit) {
            order.push((lit, false, true));
        }
    }
    for lit in &rule.body {
        if !is_generator(lit) {
            order.push((lit, false, false));
        }
    }
    order.push((&rule.head, true, false));

    let plan = RulePlan {
        rule,
        order,
        vars,
        var_sorts,
        domains,
        distinct: kb.distinct_vars(rule),
        hard: rule.weight.is_hard(),
    };
    let mut binding: Vec<Option<usize>> = vec![None; plan.vars.len()];
    let mut out = Vec::new();
    search(&plan, facts, opts, 0, &mut binding, &mut out)?;
    Ok(out)
}

fn var_index(plan: &RulePlan<'_>, v: &str) -> usize {
    plan.vars.iter().position(|x| x == v).expect("variable indexed")
}

fn const_of<'p>(plan: &'p RulePlan<'_>, binding: &[Option<usize>], term: &'p Term) -> Option<&'p str> {
    match term {
        Term::Const(c) => Some(c.as_str()),
        Term::Var(v) => {
            let i = var_index(plan, v);
            binding[i].map(|d| plan.domains[i][d].as_str())
        }
    }
}

fn instantiate(plan: &RulePlan<'_>, binding: &[Option<usize>], lit: &Literal) -> GroundAtom {
    GroundAtom::new(
        lit.predicate.clone(),
        lit.args
            .iter()
            .map(|t| const_of(plan, binding, t).expect("bound").to_string())
            .collect(),
    )
}

/// Whether binding variable `vi` to domain entry `d` respects distinctness.
fn distinct_ok(plan: &RulePlan<'_>, binding: &[Option<usize>], vi: usize, d: usize) -> bool {
    if !plan.distinct {
        return true;
    }
    let c = &plan.domains[vi][d];
    binding.iter().enumerate().all(|(j, b)| {
        j == vi
            || plan.var_sorts[j] != plan.var_sorts[vi]
            || b.is_none_or(|bd| &plan.domains[j][bd] != c)
    })
}

/// True when the fixed value of `lit` already satisfies the implication.
fn satisfied_by_fixed(lit: &Literal, is_head: bool, fixed: Option<bool>) -> bool {
    match fixed {
        None => false,
        Some(v) => {
            let holds = v != lit.negated;
            if is_head {
                holds
            } else {
                !holds
            }
        }
    }
}

fn search(
    plan: &RulePlan<'_>,
    facts: &Facts<'_>,
    opts: &GroundingOptions,
    depth: usize,
    binding: &mut Vec<Option<usize>>,
    out: &mut Vec<Vec<(GroundAtom, bool)>>,
) -> Result<()> {
    if depth == plan.order.len() {
        return emit(plan, facts, opts, binding, out);
    }
    let (lit, is_head, generator) = plan.order[depth];
    if generator {
        let pred = lit.predicate.as_str();
        let Some(cands) = facts.candidates.get(pred) else {
            return Ok(());
        };
        // Narrow by the most selective bound argument.
        let mut pool: Option<&Vec<usize>> = None;
        for (pos, t) in lit.args.iter().enumerate() {
            if let Some(c) = const_of(plan, binding, t) {
                match facts.by_arg.get(&(pred, pos, c)) {
                    Some(list) => {
                        if pool.is_none_or(|p| list.len() < p.len()) {
                            pool = Some(list);
                        }
                    }
                    None => return Ok(()),
                }
            }
        }
        let all: Vec<usize>;
        let pool = match pool {
            Some(p) => p,
            None => {
                all = (0..cands.len()).collect();
                &all
            }
        };
        'cand: for &ci in pool {
            let atom = cands[ci];
            let saved = binding.clone();
            for (t, c) in lit.args.iter().zip(&atom.args) {
                match t {
                    Term::Const(k) => {
                        if k != c {
                            *binding = saved;
                            continue 'cand;
                        }
                    }
                    Term::Var(v) => {
                        let vi = var_index(plan, v);
                        match binding[vi] {
                            Some(d) => {
                                if &plan.domains[vi][d] != c {
                                    *binding = saved;
                                    continue 'cand;
                                }
                            }
                            None => {
                                let Some(d) = plan.domains[vi].iter().position(|x| x == c) else {
                                    *binding = saved;
                                    continue 'cand;
                                };
                                if !distinct_ok(plan, binding, vi, d) {
                                    *binding = saved;
                                    continue 'cand;
                                }
                                binding[vi] = Some(d);
                            }
                        }
                    }
                }
            }
            search(plan, facts, opts, depth + 1, binding, out)?;
            *binding = saved;
        }
        return Ok(());
    }

    // Bind the literal's free variables by enumerating their domains.
    let unbound: Vec<usize> = {
        let mut u = Vec::new();
        for v in lit.vars() {
            let vi = var_index(plan, v);
            if binding[vi].is_none() && !u.contains(&vi) {
                u.push(vi);
            }
        }
        u
    };
    bind_all(plan, facts, opts, depth, lit, is_head, &unbound, 0, binding, out)
}

#[allow(clippy::too_many_arguments)]
fn bind_all(
    plan: &RulePlan<'_>,
    facts: &Facts<'_>,
    opts: &GroundingOptions,
    depth: usize,
    lit: &Literal,
    is_head: bool,
    unbound: &[usize],
    k: usize,
    binding: &mut Vec<Option<usize>>,
    out: &mut Vec<Vec<(GroundAtom, bool)>>,
) -> Result<()> {
    if k == unbound.len() {
        if opts.prune {
            let atom = instantiate(plan, binding, lit);
            if satisfied_by_fixed(lit, is_head, facts.fixed(&atom)) {
                return Ok(());
            }
        }
        return search(plan, facts, opts, depth + 1, binding, out);
    }
    let vi = unbound[k];
    for d in 0..plan.domains[vi].len() {
        if !distinct_ok(plan, binding, vi, d) {
            continue;
        }
        binding[vi] = Some(d);
        bind_all(plan, facts, opts, depth, lit, is_head, unbound, k + 1, binding, out)?;
    }
    binding[vi] = None;
    Ok(())
}

fn emit(
    plan: &RulePlan<'_>,
    facts: &Facts<'_>,
    opts: &GroundingOptions,
    binding: &[Option<usize>],
    out: &mut Vec<Vec<(GroundAtom, bool)>>,
) -> Result<()> {
    let kb = facts.kb;
    let lits: Vec<(&Literal, GroundAtom)> = plan
        .rule
        .literals()
        .map(|l| (l, instantiate(plan, binding, l)))
        .collect();

    for (_, atom) in &lits {
        let schema = kb.schema(&atom.predicate).expect("checked");
        if schema.irreflexive && has_repeat(&atom.args) {
            return Ok(());
        }
    }

    if opts.cutoff {
        let mut category: Option<&str> = None;
        for (_, atom) in &lits {
            let schema = kb.schema(&atom.predicate).expect("checked");
            if !schema.category_scoped {
                continue;
            }
            for (c, sort) in atom.args.iter().zip(&schema.arg_types) {
                if sort != ENTITY_SORT {
                    continue;
                }
                let cat = kb
                    .category_of(c)
                    .ok_or_else(|| Error::MissingCategory(c.clone()))?;
                match category {
                    None => category = Some(cat),
                    Some(prev) if prev != cat => return Ok(()),
                    Some(_) => {}
                }
            }
        }
    }

    let n = lits.len();
    let mut all_fixed = true;
    let mut satisfied = false;
    let mut body_true = true;
    for (i, (lit, atom)) in lits.iter().enumerate() {
        let is_head = i + 1 == n;
        match facts.fixed(atom) {
            None => all_fixed = false,
            Some(v) => {
                let holds = v != lit.negated;
                if is_head && holds || !is_head && !holds {
                    satisfied = true;
                }
                if !is_head && !holds {
                    body_true = false;
                }
            }
        }
    }
    if all_fixed && !satisfied && body_true && plan.hard {
        let atoms: Vec<String> = lits.iter().map(|(_, a)| a.to_string()).collect();
        return Err(Error::Infeasible(format!(
            "evidence violates hard rule `{}` at [{}]",
            plan.rule,
            atoms.join(", ")
        )));
    }
    if opts.prune && (satisfied || all_fixed) {
        return Ok(());
    }
    out.push(lits.into_iter().map(|(l, a)| (a, l.negated)).collect());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{PredicateSchema, Role};

    fn users(kb: &mut KnowledgeBase, n: usize) {
        for i in 1..=n {
            kb.add_constant("User", &format!("u{i}"));
        }
    }

    #[test]
    fn distinct_pairs_for_binary_relation() {
        let mut kb = KnowledgeBase::new();
        kb.declare(PredicateSchema::new("Friend", &["User", "User"], Role::Query)).unwrap();
        kb.declare(PredicateSchema::new("LiveInSamePlace", &["User", "User"], Role::Query))
            .unwrap();
        users(&mut kb, 2);
        kb.add_rule_text("1: Friend(a,b) => LiveInSamePlace(a,b)").unwrap();
        let p = ground(&kb, &EvidenceMap::new()).unwrap();
        let pairs: Vec<String> = p
            .rules()
            .iter()
            .map(|r| p.atom(r.body[0].atom).to_string())
            .collect();
        assert_eq!(pairs, vec!["Friend(u1,u2)", "Friend(u2,u1)"]);
    }

    #[test]
    fn cross_category_instances_are_cut() {
        let mut kb = KnowledgeBase::new();
        kb.declare(PredicateSchema::new("Friend", &["User", "User"], Role::Evidence)).unwrap();
        kb.declare(
            PredicateSchema::new("Like", &["User", "Entity"], Role::Query).category_scoped(),
        )
        .unwrap();
        users(&mut kb, 2);
        kb.set_category("e_fish", "food");
        kb.set_category("e_football", "sports");
        kb.add_rule_text("1: Friend(a,b) & Like(a,@e_fish) => Like(b,@e_football)").unwrap();
        kb.add_rule_text("1: Friend(a,b) & Like(a,e) => Like(b,f)").unwrap_err();
        kb.add_rule_text("1: forall f . Friend(a,b) & Like(a,e) => Like(b,f) [overlap]").unwrap();
        let mut ev = EvidenceMap::new();
        ev.insert(GroundAtom::of("Friend", &["u1", "u2"]), 1.0);
        let p = ground(&kb, &ev).unwrap();
        assert!(p.rules().iter().all(|r| r.rule == 1));
        // Only same-category pairs survive: (fish,fish) and (football,football).
        assert_eq!(p.rules().len(), 2);
        let uncut = ground_with(
            &kb,
            &ev,
            &GroundingOptions {
                cutoff: false,
                ..Default::default()
            },
            &[],
        )
        .unwrap();
        // The constant cross-category rule comes back without the cut-off.
        assert_eq!(uncut.rules().len(), 5);
    }

    #[test]
    fn missing_category_is_an_error() {
        let mut kb = KnowledgeBase::new();
        kb.declare(
            PredicateSchema::new("Like", &["User", "Entity"], Role::Query).category_scoped(),
        )
        .unwrap();
        users(&mut kb, 1);
        kb.add_constant("Entity", "mystery");
        kb.add_rule_text("1: Like(u,e)").unwrap();
        assert!(matches!(
            ground(&kb, &EvidenceMap::new()),
            Err(Error::MissingCategory(_))
        ));
    }

    #[test]
    fn empty_sort_is_an_error() {
        let mut kb = KnowledgeBase::new();
        kb.declare(PredicateSchema::new("Like", &["User", "Entity"], Role::Query)).unwrap();
        users(&mut kb, 2);
        kb.add_rule_text("1: Like(u,e)").unwrap();
        assert!(matches!(
            ground(&kb, &EvidenceMap::new()),
            Err(Error::EmptySort { .. })
        ));
    }

    #[test]
    fn evidence_pruning_and_closed_world() {
        let mut kb = KnowledgeBase::new();
        kb.declare(PredicateSchema::new("Male", &["User"], Role::Evidence)).unwrap();
        kb.declare(PredicateSchema::new("Sporty", &["User"], Role::Query)).unwrap();
        users(&mut kb, 3);
        kb.add_rule_text("1: Male(u) => Sporty(u)").unwrap();
        let mut ev = EvidenceMap::new();
        ev.insert(GroundAtom::of("Male", &["u1"]), 1.0);
        ev.insert(GroundAtom::of("Sporty", &["u2"]), 1.0);
        let p = ground(&kb, &ev).unwrap();
        assert_eq!(p.rules().len(), 1);
        let unpruned = ground_with(
            &kb,
            &ev,
            &GroundingOptions {
                prune: false,
                ..Default::default()
            },
            &[],
        )
        .unwrap();
        assert_eq!(unpruned.rules().len(), 3);
        let male_u3 = unpruned.atom_id(&GroundAtom::of("Male", &["u3"])).unwrap();
        assert_eq!(unpruned.evidence(male_u3), Some(0.0));
    }

    #[test]
    fn hard_violation_in_evidence_is_infeasible() {
        let mut kb = KnowledgeBase::new();
        kb.declare(PredicateSchema::new("Spouse", &["User", "User"], Role::Evidence)).unwrap();
        users(&mut kb, 2);
        kb.add_rule_text("HARD: Spouse(a,b) => Spouse(b,a)").unwrap();
        let mut ev = EvidenceMap::new();
        ev.insert(GroundAtom::of("Spouse", &["u1", "u2"]), 1.0);
        assert!(matches!(ground(&kb, &ev), Err(Error::Infeasible(_))));
        ev.insert(GroundAtom::of("Spouse", &["u2", "u1"]), 1.0);
        assert_eq!(ground(&kb, &ev).unwrap().rules().len(), 0);
    }

    #[test]
    fn open_atoms_escape_closed_world() {
        let mut kb = KnowledgeBase::new();
        kb.declare(PredicateSchema::new("Male", &["User"], Role::Evidence)).unwrap();
        kb.declare(PredicateSchema::new("Sporty", &["User"], Role::Query)).unwrap();
        users(&mut kb, 2);
        kb.add_rule_text("1: Male(u) => Sporty(u)").unwrap();
        let open = [GroundAtom::of("Male", &["u2"])];
        let p = ground_with(&kb, &EvidenceMap::new(), &GroundingOptions::default(), &open).unwrap();
        assert_eq!(p.rules().len(), 1);
        let id = p.atom_id(&open[0]).unwrap();
        assert_eq!(p.evidence(id), None);
    }

    #[test]
    fn irreflexive_atoms_never_grounded() {
        let mut kb = KnowledgeBase::new();
        kb.declare(PredicateSchema::new("Near", &["User", "User"], Role::Query).irreflexive())
            .unwrap();
        kb.declare(PredicateSchema::new("Here", &["User"], Role::Query)).unwrap();
        users(&mut kb, 3);
        kb.add_rule_text("1: Here(a) & Here(b) => Near(a,b)").unwrap();
        let p = ground(&kb, &EvidenceMap::new()).unwrap();
        assert_eq!(p.rules().len(), 6);
    }
}
