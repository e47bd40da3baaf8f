//! Probabilistic soft logic: MPE inference over [0, 1] interpretations.
//!
//! With Lukasiewicz connectives the distance of `b1 & .. & bk => h` is
//! `max(0, sum I(bi) - (k - 1) - I(h))`, so MPE is a linear program in the
//! free atoms plus one epigraph variable per weighted rule. Components of
//! the atom/rule graph are solved independently.

mod admm;
pub mod lp;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::logic::{AtomId, GroundLiteral, GroundRule, GroundedProgram, RuleId, Weight};
use crate::semantics::{rule_distance, Interpretation};
use lp::{Cmp, Lp, LpError};

pub use admm::AdmmParams;

#[derive(Clone, Debug)]
pub struct SoftRule {
    pub body: Vec<GroundLiteral>,
    pub head: GroundLiteral,
    pub lambda: f64,
    pub source: RuleId,
}

impl SoftRule {
    fn as_ground(&self) -> GroundRule {
        GroundRule {
            rule: self.source,
            body: self.body.clone(),
            head: self.head,
        }
    }
}

/// Weighted ground rules with non-negative weights, hard constraints and
/// fixed atom values.
#[derive(Clone, Debug)]
pub struct SoftProgram {
    pub evidence: Vec<Option<f64>>,
    pub rules: Vec<SoftRule>,
    pub hard: Vec<SoftRule>,
    rule_text: Vec<String>,
    /// Negative-weight rules with a body; they have no hinge form.
    pub dropped: usize,
}

impl SoftProgram {
    /// Converts a grounded program. A negative unit clause `w: H` becomes
    /// `-w: !H`; other negative-weight rules are dropped and counted.
    pub fn from_program(program: &GroundedProgram) -> Result<Self> {
        let mut rules = Vec::new();
        let mut hard = Vec::new();
        let mut dropped = 0;
        for (g, r) in program.rules().iter().enumerate() {
            let sr = SoftRule {
                body: r.body.clone(),
                head: r.head,
                lambda: 0.0,
                source: r.rule,
            };
            match program.weight_of(g) {
                Weight::Hard => hard.push(sr),
                Weight::Soft(w) if !w.is_finite() => {
                    return Err(Error::Config(format!("rule {} has non-finite weight", r.rule)))
                }
                Weight::Soft(w) if w > 0.0 => rules.push(SoftRule { lambda: w, ..sr }),
                Weight::Soft(w) if w < 0.0 => {
                    if r.body.is_empty() {
                        let head = GroundLiteral {
                            atom: r.head.atom,
                            negated: !r.head.negated,
                        };
                        rules.push(SoftRule {
                            head,
                            lambda: -w,
                            ..sr
                        });
                    } else {
                        dropped += 1;
                    }
                }
                Weight::Soft(_) => {}
            }
        }
        Ok(SoftProgram {
            evidence: (0..program.num_atoms()).map(|a| program.evidence(a)).collect(),
            rules,
            hard,
            rule_text: (0..program.num_first_order_rules())
                .map(|i| program.rule_text(i).to_string())
                .collect(),
            dropped,
        })
    }

    pub fn num_atoms(&self) -> usize {
        self.evidence.len()
    }

    /// Copy with evidence values replaced; `None` frees the atom.
    pub fn with_evidence(&self, updates: &[(AtomId, Option<f64>)]) -> Result<Self> {
        let mut out = self.clone();
        for &(a, v) in updates {
            if a >= out.evidence.len() {
                return Err(Error::AtomMissing(a));
            }
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::OutOfRange {
                        what: format!("evidence for atom {a}"),
                        value: v,
                    });
                }
            }
            out.evidence[a] = v;
        }
        Ok(out)
    }

    /// Copy keeping only the soft rules accepted by `keep`.
    pub fn restrict_rules(&self, keep: impl Fn(&SoftRule) -> bool) -> Self {
        let mut out = self.clone();
        out.rules.retain(|r| keep(r));
        out
    }

    pub fn free_atoms(&self) -> Vec<AtomId> {
        (0..self.evidence.len())
            .filter(|&a| self.evidence[a].is_none())
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct PslConfig {
    /// ADMM stopping threshold on primal and dual residuals.
    pub tolerance: f64,
    pub max_iters: usize,
    pub rho: f64,
    /// Components with more LP columns than this go to ADMM.
    pub max_lp_size: usize,
    /// Pick the optimum closest (L1) to the all-0.5 interpretation.
    pub tie_break: bool,
    /// Unused: the LP and ADMM solvers are deterministic.
    pub seed: u64,
}

impl Default for PslConfig {
    fn default() -> Self {
        PslConfig {
            tolerance: 1e-6,
            max_iters: 20_000,
            rho: 1.0,
            max_lp_size: 800,
            tie_break: true,
            seed: 0,
        }
    }
}

impl PslConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.rho.is_nan() || self.rho <= 0.0 {
            return Err(Error::Config("rho must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PslResult {
    pub values: Vec<f64>,
    pub objective: f64,
    pub hard_violation: f64,
    pub admm_components: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceReport {
    pub total: f64,
    /// Largest distance among hard rules.
    pub hard_violation: f64,
}

/// Sum of weighted distances, with hard-rule violation reported separately.
pub fn total_distance(program: &SoftProgram, interp: &Interpretation) -> Result<DistanceReport> {
    if interp.0.len() != program.num_atoms() {
        return Err(Error::Data(format!(
            "interpretation has {} values for {} atoms",
            interp.0.len(),
            program.num_atoms()
        )));
    }
    let mut total = 0.0;
    for r in &program.rules {
        total += r.lambda * rule_distance(&r.as_ground(), interp)?;
    }
    let mut hard: f64 = 0.0;
    for r in &program.hard {
        hard = hard.max(rule_distance(&r.as_ground(), interp)?);
    }
    Ok(DistanceReport {
        total,
        hard_violation: hard,
    })
}

/// `sum coefs * x + constant` over component-local atoms.
#[derive(Clone, Debug)]
pub struct LinearTerm {
    pub coefs: Vec<(usize, f64)>,
    pub constant: f64,
}

/// Linear distance form over free atoms (global ids) and the constant part.
fn linearize(rule: &SoftRule, evidence: &[Option<f64>]) -> LinearTerm {
    let k = rule.body.len() as f64;
    let mut coefs: Vec<(usize, f64)> = Vec::new();
    let mut constant = -(k - 1.0).max(0.0);
    if rule.body.is_empty() {
        constant = 1.0;
    }
    let mut add = |lit: GroundLiteral, sign: f64| {
        // I(lit) = v or 1 - v
        let (coef, c0) = if lit.negated { (-1.0, 1.0) } else { (1.0, 0.0) };
        match evidence[lit.atom] {
            Some(v) => constant += sign * (c0 + coef * v),
            None => {
                constant += sign * c0;
                match coefs.iter_mut().find(|(a, _)| *a == lit.atom) {
                    Some((_, c)) => *c += sign * coef,
                    None => coefs.push((lit.atom, sign * coef)),
                }
            }
        }
    };
    for &b in &rule.body {
        add(b, 1.0);
    }
    add(rule.head, -1.0);
    coefs.retain(|&(_, c)| c != 0.0);
    LinearTerm { coefs, constant }
}

struct CompProblem {
    atoms: Vec<AtomId>,
    soft: Vec<(f64, LinearTerm)>,
    hard: Vec<(RuleId, LinearTerm)>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Minimizes the total weighted distance subject to hard rules and the
/// [0, 1] box.
pub fn mpe_infer(program: &SoftProgram, cfg: &PslConfig) -> Result<PslResult> {
    cfg.validate()?;
    let n = program.num_atoms();
    let mut soft_terms = Vec::new();
    for r in &program.rules {
        let t = linearize(r, &program.evidence);
        if !t.coefs.is_empty() {
            soft_terms.push((r.lambda, t));
        }
    }
    let mut hard_terms = Vec::new();
    for r in &program.hard {
        let t = linearize(r, &program.evidence);
        if t.coefs.is_empty() {
            if t.constant > 1e-9 {
                return Err(Error::Infeasible(format!(
                    "evidence violates hard rule `{}`",
                    program.rule_text[r.source]
                )));
            }
        } else {
            hard_terms.push((r.source, t));
        }
    }

    let mut parent: Vec<usize> = (0..n).collect();
    for t in soft_terms.iter().map(|(_, t)| t).chain(hard_terms.iter().map(|(_, t)| t)) {
        let first = t.coefs[0].0;
        for &(a, _) in &t.coefs[1..] {
            let (ra, rb) = (find(&mut parent, first), find(&mut parent, a));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut slot: Vec<Option<usize>> = vec![None; n];
    let mut comps: Vec<CompProblem> = Vec::new();
    let mut local = vec![usize::MAX; n];
    for a in (0..n).filter(|&a| program.evidence[a].is_none()) {
        let root = find(&mut parent, a);
        let idx = *slot[root].get_or_insert_with(|| {
            comps.push(CompProblem {
                atoms: Vec::new(),
                soft: Vec::new(),
                hard: Vec::new(),
            });
            comps.len() - 1
        });
        local[a] = comps[idx].atoms.len();
        comps[idx].atoms.push(a);
    }
    let relabel = |t: &LinearTerm| LinearTerm {
        coefs: t.coefs.iter().map(|&(a, c)| (local[a], c)).collect(),
        constant: t.constant,
    };
    for (lambda, t) in &soft_terms {
        let root = find(&mut parent, t.coefs[0].0);
        let idx = slot[root].expect("component exists");
        comps[idx].soft.push((*lambda, relabel(t)));
    }
    for (src, t) in &hard_terms {
        let root = find(&mut parent, t.coefs[0].0);
        let idx = slot[root].expect("component exists");
        comps[idx].hard.push((*src, relabel(t)));
    }

    let solved: Vec<Result<(Vec<f64>, bool)>> = comps
        .par_iter()
        .map(|c| solve_component(c, cfg, &program.rule_text))
        .collect();
    let mut values: Vec<f64> = program.evidence.iter().map(|v| v.unwrap_or(0.5)).collect();
    let mut admm_components = 0;
    for (c, s) in comps.iter().zip(solved) {
        let (x, used_admm) = s?;
        admm_components += usize::from(used_admm);
        for (&a, v) in c.atoms.iter().zip(x) {
            values[a] = v.clamp(0.0, 1.0);
        }
    }
    let interp = Interpretation(values);
    let report = total_distance(program, &interp)?;
    Ok(PslResult {
        values: interp.0,
        objective: report.total,
        hard_violation: report.hard_violation,
        admm_components,
    })
}

fn solve_component(c: &CompProblem, cfg: &PslConfig, rule_text: &[String]) -> Result<(Vec<f64>, bool)> {
    let m = c.atoms.len();
    let size = m + c.soft.len() + c.hard.len();
    if size <= cfg.max_lp_size {
        match solve_lp(c, cfg) {
            Ok(x) => return Ok((x, false)),
            Err(LpError::Infeasible) => {
                let mut texts: Vec<&str> = c.hard.iter().map(|(s, _)| rule_text[*s].as_str()).collect();
                texts.sort_unstable();
                texts.dedup();
                return Err(Error::Infeasible(format!(
                    "hard rules cannot be satisfied together: {}",
                    texts.join("; ")
                )));
            }
            Err(LpError::Unbounded) => {
                return Err(Error::Solver("bounded program reported unbounded".into()))
            }
            Err(LpError::IterationLimit) => {}
        }
    }
    let hard: Vec<LinearTerm> = c.hard.iter().map(|(_, t)| t.clone()).collect();
    let params = AdmmParams {
        rho: cfg.rho,
        max_iters: cfg.max_iters,
        tolerance: cfg.tolerance,
    };
    Ok((admm::solve(m, &c.soft, &hard, &params), true))
}

fn base_lp(c: &CompProblem) -> Lp {
    let m = c.atoms.len();
    let mut lp = Lp::new(m);
    for (lambda, t) in &c.soft {
        let tv = lp.add_var(*lambda);
        let mut coefs = t.coefs.clone();
        coefs.push((tv, -1.0));
        lp.add_row(coefs, Cmp::Le, -t.constant);
    }
    for (_, t) in &c.hard {
        lp.add_row(t.coefs.clone(), Cmp::Le, -t.constant);
    }
    for i in 0..m {
        lp.add_row(vec![(i, 1.0)], Cmp::Le, 1.0);
    }
    lp
}

/// Relative objective slack granted to the tie-breaking stage.
const TIE_SLACK: f64 = 1e-11;

fn solve_lp(c: &CompProblem, cfg: &PslConfig) -> std::result::Result<Vec<f64>, LpError> {
    let m = c.atoms.len();
    let mut lp = base_lp(c);
    let first = lp::solve(&lp)?;
    if !cfg.tie_break {
        return Ok(first.x[..m].to_vec());
    }
    // Stage two: stay within the optimum and move toward 0.5.
    let f_star = first.objective;
    let epi: Vec<(usize, f64)> = (m..lp.num_vars).map(|j| (j, lp.cost[j])).collect();
    lp.add_row(epi, Cmp::Le, f_star + TIE_SLACK * f_star.abs().max(1.0));
    lp.cost.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..m {
        let u = lp.add_var(1.0);
        lp.add_row(vec![(i, 1.0), (u, -1.0)], Cmp::Le, 0.5);
        lp.add_row(vec![(i, -1.0), (u, -1.0)], Cmp::Le, -0.5);
    }
    match lp::solve(&lp) {
        Ok(s) => Ok(s.x[..m].to_vec()),
        Err(_) => Ok(first.x[..m].to_vec()),
    }
}

/// MPE value of each target when every other atom is fixed at `values`.
/// The one-dimensional objective is convex piecewise linear, so it is
/// minimized exactly over its breakpoints; ties resolve toward 0.5.
pub fn site_values(program: &SoftProgram, values: &[f64], targets: &[AtomId]) -> Result<Vec<f64>> {
    let n = program.num_atoms();
    if values.len() != n {
        return Err(Error::Data(format!("{} values for {n} atoms", values.len())));
    }
    if let Some(&v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::OutOfRange {
            what: "interpretation".into(),
            value: v,
        });
    }
    let mut touching: Vec<Vec<(bool, usize)>> = vec![Vec::new(); n];
    for (hard, list) in [(false, &program.rules), (true, &program.hard)] {
        for (i, r) in list.iter().enumerate() {
            for l in r.body.iter().chain(std::iter::once(&r.head)) {
                let slot = &mut touching[l.atom];
                if slot.last() != Some(&(hard, i)) {
                    slot.push((hard, i));
                }
            }
        }
    }
    targets
        .par_iter()
        .map(|&t| {
            if t >= n {
                return Err(Error::AtomMissing(t));
            }
            if program.evidence[t].is_some() {
                return Err(Error::Data(format!("atom {t} is fixed by evidence")));
            }
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let mut hinges: Vec<(f64, f64, f64)> = Vec::new();
            for &(hard, i) in &touching[t] {
                let r = if hard { &program.hard[i] } else { &program.rules[i] };
                let (c, b) = site_linear(r, values, t);
                if hard {
                    if c > 0.0 {
                        hi = hi.min(-b / c);
                    } else if c < 0.0 {
                        lo = lo.max(-b / c);
                    } else if b > 1e-9 {
                        return Err(Error::Infeasible(format!(
                            "hard rule `{}` is violated by fixed values",
                            program.rule_text[r.source]
                        )));
                    }
                } else if c != 0.0 {
                    hinges.push((r.lambda, c, b));
                }
            }
            if lo > hi + 1e-12 {
                return Err(Error::Infeasible(format!("no value of atom {t} satisfies the hard rules")));
            }
            let hi = hi.max(lo);
            let f = |x: f64| hinges.iter().map(|&(l, c, b)| l * (c * x + b).max(0.0)).sum::<f64>();
            let mut cands = vec![lo, hi];
            cands.extend(hinges.iter().map(|&(_, c, b)| -b / c).filter(|x| *x > lo && *x < hi));
            let vals: Vec<f64> = cands.iter().map(|&x| f(x)).collect();
            let best = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let slack = 1e-12 * best.abs().max(1.0);
            let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
            for (&x, &v) in cands.iter().zip(&vals) {
                if v <= best + slack {
                    xmin = xmin.min(x);
                    xmax = xmax.max(x);
                }
            }
            Ok(0.5f64.clamp(xmin, xmax))
        })
        .collect()
}

/// Coefficient and constant of the distance form of `r` in the atom `t`.
fn site_linear(r: &SoftRule, values: &[f64], t: AtomId) -> (f64, f64) {
    let mut c = 0.0;
    let mut b = if r.body.is_empty() { 1.0 } else { -(r.body.len() as f64 - 1.0) };
    let mut add = |lit: &GroundLiteral, sign: f64| {
        let (coef, c0) = if lit.negated { (-1.0, 1.0) } else { (1.0, 0.0) };
        if lit.atom == t {
            c += sign * coef;
            b += sign * c0;
        } else {
            b += sign * (c0 + coef * values[lit.atom]);
        }
    };
    for l in &r.body {
        add(l, 1.0);
    }
    add(&r.head, -1.0);
    (c, b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoftPrediction {
    pub atom: AtomId,
    pub value: f64,
    /// Thresholded at 0.5 inclusive.
    pub predicted: bool,
}

/// Per-atom values with boolean predictions; evidence atoms echo their
/// fixed value.
pub fn soft_marginal_report(program: &SoftProgram, interp: &Interpretation) -> Vec<SoftPrediction> {
    interp
        .0
        .iter()
        .enumerate()
        .map(|(a, &v)| {
            let value = program.evidence.get(a).copied().flatten().unwrap_or(v);
            SoftPrediction {
                atom: a,
                value,
                predicted: value >= 0.5,
            }
        })
        .collect()
}
