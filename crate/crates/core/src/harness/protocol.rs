//! Friend-observed and friend-latent protocols over a grounded task
//! program.
//!
//! A task program keeps every target atom open. Each target group is
//! inferred with all other atoms fixed at the values of a shared vector, so
//! leave-one-out inference over many targets runs in one pass.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dataset::Dataset;
use super::metrics::{Confusion, Metrics};
use crate::error::{Error, Result};
use crate::extract::US_STATES;
use crate::logic::{
    ground_with, parse_rule_file, AtomId, EvidenceMap, GroundAtom, GroundedProgram, GroundingOptions,
    KnowledgeBase, Role, USER_SORT,
};
use crate::mln::{site_marginals, MlnConfig};
use crate::psl::lp::{self, Cmp, Lp, LpError};
use crate::psl::{site_values, PslConfig, SoftProgram, SoftRule};
use crate::social::{category_of_like_cat, declare_category_predicates, default_schema, like_cat, STATE_SORT};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    /// One binary `LikeCat_<c>(u)` target per user and category.
    LikeCat,
    /// One-hot choice among the 50 `LiveIn(u, s)` atoms per user with a
    /// gold location.
    Location,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::LikeCat => "likecat",
            Task::Location => "location",
        }
    }

    pub fn owns(self, predicate: &str) -> bool {
        match self {
            Task::LikeCat => category_of_like_cat(predicate).is_some(),
            Task::Location => predicate == "LiveIn",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Engine {
    Mln(MlnConfig),
    Psl(PslConfig),
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Mln(_) => "mln",
            Engine::Psl(_) => "psl",
        }
    }
}

/// Atoms predicted jointly for one user: a single atom for binary tasks,
/// the mutually exclusive alternatives for one-hot tasks.
#[derive(Clone, Debug)]
pub struct TargetGroup {
    pub user: String,
    /// Category label or `location`.
    pub label: String,
    pub atoms: Vec<AtomId>,
    /// Index of the gold-true atom, if any.
    pub gold: Option<usize>,
}

impl TargetGroup {
    pub fn is_binary(&self) -> bool {
        self.atoms.len() == 1
    }
}

#[derive(Clone, Debug)]
pub struct TaskProgram {
    pub task: Task,
    pub program: GroundedProgram,
    pub groups: Vec<TargetGroup>,
    /// Evidence values for evidence atoms, gold (0/1) for open atoms; open
    /// atoms without gold read 0.
    pub gold_values: Vec<f64>,
}

/// Default schema, `LikeCat_<c>` predicates for the dataset's categories,
/// the given rule file, dataset constants and the 50 state constants.
pub fn build_kb(dataset: &Dataset, rules_text: &str) -> Result<KnowledgeBase> {
    let mut kb = default_schema();
    declare_category_predicates(&mut kb, dataset.categories(), Role::Query)?;
    parse_rule_file(rules_text, &mut kb)?;
    dataset.graph.populate(&mut kb)?;
    for s in US_STATES {
        kb.add_constant(STATE_SORT, s);
    }
    Ok(kb)
}

/// Rule file text for the rules added on top of the default schema.
pub fn model_rules_to_string(kb: &KnowledgeBase) -> String {
    let skip = default_schema().rules().len();
    kb.rules()[skip..].iter().map(|r| format!("{r}\n")).collect()
}

pub fn task_program(
    kb: &KnowledgeBase,
    dataset: &Dataset,
    task: Task,
    opts: &GroundingOptions,
) -> Result<TaskProgram> {
    let evidence: EvidenceMap = dataset
        .graph
        .evidence()
        .iter()
        .filter(|(a, _)| !task.owns(&a.predicate))
        .map(|(a, v)| (a.clone(), *v))
        .collect();
    let mut pending: Vec<(String, String, Vec<GroundAtom>, Option<usize>)> = Vec::new();
    match task {
        Task::LikeCat => {
            for u in dataset.graph.users() {
                for c in dataset.categories().labels() {
                    let a = GroundAtom::new(like_cat(c), vec![u.to_string()]);
                    let gold = dataset.gold_true(&a).then_some(0);
                    pending.push((u.to_string(), c.clone(), vec![a], gold));
                }
            }
        }
        Task::Location => {
            for u in dataset.graph.users() {
                let atoms: Vec<GroundAtom> = US_STATES
                    .iter()
                    .map(|s| GroundAtom::of("LiveIn", &[u, s]))
                    .collect();
                if let Some(i) = atoms.iter().position(|a| dataset.gold_true(a)) {
                    pending.push((u.to_string(), "location".into(), atoms, Some(i)));
                }
            }
        }
    }
    let open: Vec<GroundAtom> = pending.iter().flat_map(|p| p.2.iter().cloned()).collect();
    let program = ground_with(kb, &evidence, opts, &open)?;
    let groups = pending
        .into_iter()
        .map(|(user, label, atoms, gold)| TargetGroup {
            user,
            label,
            atoms: atoms
                .iter()
                .map(|a| program.atom_id(a).expect("open atoms are interned"))
                .collect(),
            gold,
        })
        .collect();
    let gold_values = (0..program.num_atoms())
        .map(|id| match program.evidence(id) {
            Some(v) => v,
            None => f64::from(u8::from(dataset.gold_true(program.atom(id)))),
        })
        .collect();
    Ok(TaskProgram {
        task,
        program,
        groups,
        gold_values,
    })
}

/// `(is_hard, rule index)` of every PSL rule touching each atom.
type Touching = Vec<Vec<(bool, usize)>>;

/// Engine state prepared once per program.
pub struct Prepared<'a> {
    program: &'a GroundedProgram,
    psl: Option<(SoftProgram, Touching)>,
}

pub fn prepare<'a>(program: &'a GroundedProgram, engine: &Engine) -> Result<Prepared<'a>> {
    let psl = match engine {
        Engine::Mln(cfg) => {
            cfg.validate()?;
            None
        }
        Engine::Psl(cfg) => {
            cfg.validate()?;
            let soft = SoftProgram::from_program(program)?;
            let mut touching = vec![Vec::new(); soft.num_atoms()];
            for (hard, list) in [(false, &soft.rules), (true, &soft.hard)] {
                for (i, r) in list.iter().enumerate() {
                    for l in r.body.iter().chain(std::iter::once(&r.head)) {
                        let slot: &mut Vec<(bool, usize)> = &mut touching[l.atom];
                        if slot.last() != Some(&(hard, i)) {
                            slot.push((hard, i));
                        }
                    }
                }
            }
            Some((soft, touching))
        }
    };
    Ok(Prepared { program, psl })
}

/// Scores per group with every non-group atom fixed at `values`: P(true)
/// or the MPE value for binary groups, a distribution (MLN) or MPE values
/// (PSL) over the alternatives for one-hot groups.
pub fn infer_groups(prep: &Prepared<'_>, values: &[f64], groups: &[&TargetGroup]) -> Result<Vec<Vec<f64>>> {
    if groups.is_empty() {
        return Ok(Vec::new());
    }
    if groups.iter().all(|g| g.is_binary()) {
        let atoms: Vec<AtomId> = groups.iter().map(|g| g.atoms[0]).collect();
        let out = match &prep.psl {
            None => {
                let world: Vec<bool> = values.iter().map(|&v| v >= 0.5).collect();
                site_marginals(prep.program, &world, &atoms)?
            }
            Some((soft, _)) => site_values(soft, values, &atoms)?,
        };
        return Ok(out.into_iter().map(|v| vec![v]).collect());
    }
    match &prep.psl {
        None => {
            let world: Vec<bool> = values.iter().map(|&v| v >= 0.5).collect();
            groups
                .par_iter()
                .map(|g| mln_one_hot(prep.program, &world, &g.atoms))
                .collect()
        }
        Some((soft, touching)) => groups
            .par_iter()
            .map(|g| psl_one_hot(soft, touching, values, &g.atoms))
            .collect(),
    }
}

fn mln_one_hot(program: &GroundedProgram, world: &[bool], atoms: &[AtomId]) -> Result<Vec<f64>> {
    let pos: HashMap<AtomId, usize> = atoms.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let mut rules: Vec<usize> = atoms.iter().flat_map(|&a| program.rules_of(a).iter().copied()).collect();
    rules.sort_unstable();
    rules.dedup();
    let scores: Vec<f64> = (0..atoms.len())
        .map(|choice| {
            let val = |a: AtomId| pos.get(&a).map_or(world[a], |&i| i == choice);
            let mut s = 0.0;
            for &g in &rules {
                let r = &program.rules()[g];
                let sat = !r.body.iter().all(|l| l.holds(val(l.atom))) || r.head.holds(val(r.head.atom));
                match program.weight_of(g).value() {
                    Some(w) => s += if sat { w } else { 0.0 },
                    None if !sat => return f64::NEG_INFINITY,
                    None => {}
                }
            }
            s
        })
        .collect();
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Err(Error::Infeasible("no alternative satisfies the hard rules".into()));
    }
    let z: f64 = scores.iter().map(|s| (s - m).exp()).sum();
    Ok(scores.iter().map(|s| (s - m).exp() / z).collect())
}

fn psl_one_hot(
    soft: &SoftProgram,
    touching: &[Vec<(bool, usize)>],
    values: &[f64],
    atoms: &[AtomId],
) -> Result<Vec<f64>> {
    let k = atoms.len();
    let pos: HashMap<AtomId, usize> = atoms.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let mut rules: Vec<(bool, usize)> = atoms.iter().flat_map(|&a| touching[a].iter().copied()).collect();
    rules.sort_unstable();
    rules.dedup();
    let mut lp = Lp::new(k);
    for &(hard, i) in &rules {
        let r = if hard { &soft.hard[i] } else { &soft.rules[i] };
        let (coefs, b) = group_linear(r, values, &pos);
        if coefs.is_empty() {
            if hard && b > 1e-9 {
                return Err(Error::Infeasible("fixed values violate a hard rule".into()));
            }
            continue;
        }
        if hard {
            lp.add_row(coefs, Cmp::Le, -b);
        } else {
            let t = lp.add_var(r.lambda);
            let mut row = coefs;
            row.push((t, -1.0));
            lp.add_row(row, Cmp::Le, -b);
        }
    }
    for i in 0..k {
        lp.add_row(vec![(i, 1.0)], Cmp::Le, 1.0);
    }
    lp.add_row((0..k).map(|i| (i, 1.0)).collect(), Cmp::Eq, 1.0);
    match lp::solve(&lp) {
        Ok(s) => Ok(s.x[..k].to_vec()),
        Err(LpError::Infeasible) => Err(Error::Infeasible("one-hot choice violates the hard rules".into())),
        Err(e) => Err(Error::Solver(format!("{e:?}"))),
    }
}

fn group_linear(r: &SoftRule, values: &[f64], pos: &HashMap<AtomId, usize>) -> (Vec<(usize, f64)>, f64) {
    let mut coefs: Vec<(usize, f64)> = Vec::new();
    let mut b = 1.0 - r.body.len() as f64;
    let lits = r.body.iter().map(|l| (l, 1.0)).chain(std::iter::once((&r.head, -1.0)));
    for (lit, sign) in lits {
        let (coef, c0) = if lit.negated { (-1.0, 1.0) } else { (1.0, 0.0) };
        match pos.get(&lit.atom) {
            Some(&i) => {
                b += sign * c0;
                match coefs.iter_mut().find(|(j, _)| *j == i) {
                    Some((_, c)) => *c += sign * coef,
                    None => coefs.push((i, sign * coef)),
                }
            }
            None => b += sign * (c0 + coef * values[lit.atom]),
        }
    }
    coefs.retain(|&(_, c)| c != 0.0);
    (coefs, b)
}

/// Index of the predicted alternative; for binary groups 0 means true and
/// 1 false, with 0.5 predicting true.
pub fn decide(group: &TargetGroup, scores: &[f64]) -> usize {
    if group.is_binary() {
        usize::from(scores[0] < 0.5)
    } else {
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        best
    }
}

/// Values written back for a group between latent rounds: MLN predictions
/// are hardened to 0/1, PSL binary values kept as they are, one-hot
/// choices set to their argmax.
fn estimate(engine: &Engine, group: &TargetGroup, scores: &[f64]) -> Vec<f64> {
    let pick = decide(group, scores);
    if group.is_binary() {
        match engine {
            Engine::Mln(_) => vec![f64::from(u8::from(pick == 0))],
            Engine::Psl(_) => vec![scores[0]],
        }
    } else {
        (0..group.atoms.len()).map(|i| f64::from(u8::from(i == pick))).collect()
    }
}

pub fn score(groups: &[&TargetGroup], scores: &[Vec<f64>]) -> Metrics {
    if groups.iter().all(|g| g.is_binary()) {
        Metrics::Binary(Confusion::from_pairs(
            groups
                .iter()
                .zip(scores)
                .map(|(g, s)| (decide(g, s) == 0, g.gold.is_some())),
        ))
    } else {
        let correct = groups
            .iter()
            .zip(scores)
            .filter(|(g, s)| g.gold == Some(decide(g, s)))
            .count();
        Metrics::Multi {
            correct,
            total: groups.len(),
        }
    }
}

/// Seeded choice of `round(fraction * n)` group indices (at least one),
/// returned in ascending order.
pub fn choose_targets(n: usize, fraction: f64, seed: u64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("target fraction {fraction} must lie in (0, 1]")));
    }
    if n == 0 {
        return Err(Error::Data("no target atoms".into()));
    }
    let k = ((fraction * n as f64).round() as usize).clamp(1, n);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.truncate(k);
    idx.sort_unstable();
    Ok(idx)
}

/// Leave-one-out: each target is inferred with every other atom at its
/// gold or evidence value.
pub fn friend_observed(tp: &TaskProgram, engine: &Engine, targets: &[usize]) -> Result<Vec<Vec<f64>>> {
    let prep = prepare(&tp.program, engine)?;
    let groups: Vec<&TargetGroup> = targets.iter().map(|&i| &tp.groups[i]).collect();
    infer_groups(&prep, &tp.gold_values, &groups)
}

#[derive(Clone, Debug)]
pub struct LatentOptions {
    pub hidden_fraction: f64,
    pub rounds: usize,
    pub seed: u64,
    /// Update hidden groups one at a time in a seeded shuffled order per
    /// round instead of all at once from the previous round's values.
    pub sequential: bool,
}

impl Default for LatentOptions {
    fn default() -> Self {
        LatentOptions {
            hidden_fraction: 0.2,
            rounds: 3,
            seed: 0,
            sequential: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LatentRun {
    pub hidden: Vec<usize>,
    /// Scores after round 0 (individual evidence only) and each later round.
    pub rounds: Vec<Vec<Vec<f64>>>,
}

/// Predicates with at least two user-sorted arguments.
fn user_relations(program: &GroundedProgram) -> HashSet<String> {
    program
        .atoms()
        .iter()
        .map(|a| a.predicate.as_str())
        .collect::<HashSet<_>>()
        .into_iter()
        .filter(|p| {
            program
                .arg_sorts(p)
                .is_some_and(|s| s.iter().filter(|x| x.as_str() == USER_SORT).count() >= 2)
        })
        .map(str::to_string)
        .collect()
}

/// Hides a fraction of the target groups and re-estimates them over
/// rounds. Round 0 uses only rules without user-user atoms; later rounds
/// read neighbours' current estimates. Gold values of hidden atoms are
/// never read.
pub fn friend_latent(tp: &TaskProgram, engine: &Engine, opts: &LatentOptions) -> Result<LatentRun> {
    if !(opts.hidden_fraction > 0.0 && opts.hidden_fraction < 1.0) {
        return Err(Error::Config(format!(
            "hidden fraction {} must lie in (0, 1)",
            opts.hidden_fraction
        )));
    }
    let hidden = choose_targets(tp.groups.len(), opts.hidden_fraction, opts.seed)?;
    let groups: Vec<&TargetGroup> = hidden.iter().map(|&i| &tp.groups[i]).collect();
    let mut values = tp.gold_values.clone();
    for g in &groups {
        for &a in &g.atoms {
            values[a] = 0.0;
        }
    }
    let relations = user_relations(&tp.program);
    let individual = tp.program.restrict_rules(|r| {
        !r.literals()
            .any(|l| relations.contains(&tp.program.atom(l.atom).predicate))
    });
    let write = |values: &mut [f64], g: &TargetGroup, s: &[f64]| {
        for (&a, v) in g.atoms.iter().zip(estimate(engine, g, s)) {
            values[a] = v;
        }
    };

    let mut rounds = Vec::with_capacity(opts.rounds + 1);
    let first = infer_groups(&prepare(&individual, engine)?, &values, &groups)?;
    for (g, s) in groups.iter().zip(&first) {
        write(&mut values, g, s);
    }
    rounds.push(first);
    let prep = prepare(&tp.program, engine)?;
    for r in 1..=opts.rounds {
        let scores = if opts.sequential {
            let mut order: Vec<usize> = (0..groups.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64)));
            let mut out = vec![Vec::new(); groups.len()];
            for i in order {
                let s = infer_groups(&prep, &values, &[groups[i]])?.pop().expect("one group");
                write(&mut values, groups[i], &s);
                out[i] = s;
            }
            out
        } else {
            let s = infer_groups(&prep, &values, &groups)?;
            for (g, sc) in groups.iter().zip(&s) {
                write(&mut values, g, sc);
            }
            s
        };
        rounds.push(scores);
    }
    Ok(LatentRun { hidden, rounds })
}

/// P(target(u) | cond(u)) / P(target(u) | !cond(u)) averaged over users,
/// for unary user predicates. `tp` should be grounded without pruning so
/// that rules falsified by the observed condition are present.
pub fn rule_probability_ratio(
    tp: &TaskProgram,
    engine: &Engine,
    users: &[String],
    condition: &str,
    target: &str,
) -> Result<f64> {
    let prep = prepare(&tp.program, engine)?;
    let (mut on, mut off) = (0usize, 0usize);
    let mut pairs: Vec<(Option<AtomId>, AtomId)> = Vec::new();
    for u in users {
        let t = tp
            .program
            .atom_id(&GroundAtom::new(target, vec![u.clone()]))
            .ok_or_else(|| Error::Data(format!("no atom {target}({u})")))?;
        let c = tp.program.atom_id(&GroundAtom::new(condition, vec![u.clone()]));
        if c.is_some_and(|c| tp.gold_values[c] >= 0.5) {
            on += 1;
        } else {
            off += 1;
        }
        pairs.push((c, t));
    }
    if on == 0 || off == 0 {
        return Err(Error::Data(format!(
            "condition `{condition}` lacks support: {on} users with it, {off} without"
        )));
    }
    let mut sum = [0.0, 0.0];
    let mut values = tp.gold_values.clone();
    for &(c, t) in &pairs {
        let group = TargetGroup {
            user: String::new(),
            label: String::new(),
            atoms: vec![t],
            gold: None,
        };
        for (slot, v) in [(0, 1.0), (1, 0.0)] {
            let old = c.map(|c| std::mem::replace(&mut values[c], v));
            sum[slot] += infer_groups(&prep, &values, &[&group])?[0][0];
            if let (Some(c), Some(old)) = (c, old) {
                values[c] = old;
            }
        }
    }
    if sum[1] == 0.0 {
        return Err(Error::Data(format!("P({target} | !{condition}) is zero")));
    }
    Ok(sum[0] / sum[1])
}
