//! Evaluation runs: engines under one setting plus the comparison
//! baselines on the same targets.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::Dataset;
use super::metrics::EvalReport;
use super::protocol::{
    choose_targets, friend_latent, friend_observed, rule_probability_ratio, score, task_program, Engine,
    LatentOptions, Task, TargetGroup, TaskProgram,
};
use crate::baselines::{nb_train, CfConfig, CfModel, Featurizer, NaiveBayes, PopulationTable, SparseFeatures, SELF_BLOCK};
use crate::error::{Error, Result};
use crate::extract::US_STATES;
use crate::logic::{GroundAtom, GroundingOptions, KnowledgeBase};
use crate::social::{like_cat, SocialGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Setting {
    Observed,
    Latent,
}

impl Setting {
    pub fn name(self) -> &'static str {
        match self {
            Setting::Observed => "observed",
            Setting::Latent => "latent",
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub setting: Setting,
    pub tasks: Vec<Task>,
    pub engines: Vec<Engine>,
    /// Target choice (`hidden_fraction`, `seed`) is shared by both
    /// settings; rounds and scheduling apply to the latent one.
    pub latent: LatentOptions,
    pub baselines: bool,
    pub cf: CfConfig,
    pub population: PopulationTable,
    pub grounding: GroundingOptions,
    /// `(condition, target)` unary predicate pairs for the rule report.
    pub ratios: Vec<(String, String)>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            setting: Setting::Observed,
            tasks: vec![Task::LikeCat, Task::Location],
            engines: Vec::new(),
            latent: LatentOptions::default(),
            baselines: true,
            cf: CfConfig::default(),
            population: PopulationTable::default(),
            grounding: GroundingOptions::default(),
            ratios: Vec::new(),
        }
    }
}

/// Per-target scores of one named predictor.
type NamedScores = (&'static str, Vec<Vec<f64>>);

/// Runs every configured engine and baseline. Result names are
/// `<task>.<predictor>`; latent runs add `<task>.<engine>.round<r>`, with
/// the unsuffixed name holding the last round.
pub fn evaluate(kb: &KnowledgeBase, dataset: &Dataset, opts: &EvalOptions) -> Result<EvalReport> {
    let mut report = EvalReport::default();
    report.set_meta("setting", opts.setting.name());
    report.set_meta("seed", opts.latent.seed);
    report.set_meta("target_fraction", opts.latent.hidden_fraction);
    if opts.setting == Setting::Latent {
        report.set_meta("rounds", opts.latent.rounds);
        report.set_meta("sequential", opts.latent.sequential);
    }
    report.set_meta(
        "engines",
        opts.engines.iter().map(Engine::name).collect::<Vec<_>>().join(","),
    );
    for &task in &opts.tasks {
        let tp = task_program(kb, dataset, task, &opts.grounding)?;
        if tp.groups.is_empty() {
            continue;
        }
        let targets = choose_targets(tp.groups.len(), opts.latent.hidden_fraction, opts.latent.seed)?;
        let target_groups: Vec<&TargetGroup> = targets.iter().map(|&i| &tp.groups[i]).collect();
        report.set_meta(&format!("{}.targets", task.name()), targets.len());
        for engine in &opts.engines {
            let name = format!("{}.{}", task.name(), engine.name());
            match opts.setting {
                Setting::Observed => {
                    let s = friend_observed(&tp, engine, &targets)?;
                    report.push(&name, score(&target_groups, &s));
                }
                Setting::Latent => {
                    let run = friend_latent(&tp, engine, &opts.latent)?;
                    for (r, s) in run.rounds.iter().enumerate() {
                        report.push(&format!("{name}.round{r}"), score(&target_groups, s));
                    }
                    let last = run.rounds.last().expect("round 0 always runs");
                    report.push(&name, score(&target_groups, last));
                }
            }
        }
        if opts.baselines {
            for (b, s) in run_baselines(&tp, dataset, &targets, opts)? {
                report.push(&format!("{}.{b}", task.name()), score(&target_groups, &s));
            }
        }
    }
    if !opts.ratios.is_empty() {
        let engine = opts
            .engines
            .first()
            .ok_or_else(|| Error::Config("the rule report needs an engine".into()))?;
        let unpruned = GroundingOptions {
            prune: false,
            ..opts.grounding.clone()
        };
        let tp = task_program(kb, dataset, Task::LikeCat, &unpruned)?;
        let users: Vec<String> = dataset.graph.users().map(str::to_string).collect();
        for (cond, target) in &opts.ratios {
            let r = rule_probability_ratio(&tp, engine, &users, cond, target)?;
            report.rule_ratios.push((format!("{target}|{cond}"), r));
        }
    }
    Ok(report)
}

/// Observed graph plus every gold task value the setting reveals: all of
/// them when observed, the non-target ones when latent.
fn view_graph(tp: &TaskProgram, dataset: &Dataset, hidden: &BTreeSet<usize>) -> Result<SocialGraph> {
    let mut view = dataset.graph.clone();
    let owned: Vec<GroundAtom> = view
        .evidence()
        .keys()
        .filter(|a| tp.task.owns(&a.predicate))
        .cloned()
        .collect();
    for a in &owned {
        view.remove(a);
    }
    for (i, g) in tp.groups.iter().enumerate() {
        if hidden.contains(&i) {
            continue;
        }
        match tp.task {
            Task::LikeCat => {
                let a = GroundAtom::new(like_cat(&g.label), vec![g.user.clone()]);
                view.set(a, f64::from(u8::from(g.gold.is_some())))?;
            }
            Task::Location => {
                if let Some(k) = g.gold {
                    view.set(GroundAtom::of("LiveIn", &[&g.user, US_STATES[k]]), 1.0)?;
                }
            }
        }
    }
    Ok(view)
}

/// Features of the group's user without the target's own value.
fn target_features(features: &BTreeMap<String, SparseFeatures>, g: &TargetGroup, task: Task) -> SparseFeatures {
    let mut f = features[&g.user].clone();
    match task {
        Task::LikeCat => {
            f.values.remove(&format!("{SELF_BLOCK}:{}", like_cat(&g.label)));
        }
        Task::Location => {
            let prefix = format!("{SELF_BLOCK}:LiveIn(");
            f.values.retain(|k, _| !k.starts_with(&prefix));
        }
    }
    f
}

fn one_hot(k: usize, n: usize) -> Vec<f64> {
    (0..n).map(|i| f64::from(u8::from(i == k))).collect()
}

fn run_baselines(
    tp: &TaskProgram,
    dataset: &Dataset,
    targets: &[usize],
    opts: &EvalOptions,
) -> Result<Vec<NamedScores>> {
    let target_set: BTreeSet<usize> = targets.iter().copied().collect();
    let hidden = match opts.setting {
        Setting::Observed => BTreeSet::new(),
        Setting::Latent => target_set.clone(),
    };
    let view = view_graph(tp, dataset, &hidden)?;
    let fz = Featurizer::new(&view);
    let features: BTreeMap<String, SparseFeatures> = view
        .users()
        .map(|u| (u.to_string(), fz.featurize(u).flatten()))
        .collect();
    let training: Vec<usize> = (0..tp.groups.len()).filter(|i| !target_set.contains(i)).collect();
    match tp.task {
        Task::LikeCat => likecat_baselines(tp, &view, &features, targets, &training, opts),
        Task::Location => location_baselines(tp, &features, targets, &training, opts),
    }
}

fn likecat_baselines(
    tp: &TaskProgram,
    view: &SocialGraph,
    features: &BTreeMap<String, SparseFeatures>,
    targets: &[usize],
    training: &[usize],
    opts: &EvalOptions,
) -> Result<Vec<NamedScores>> {
    let labels = view.categories().labels();
    let mut prior: BTreeMap<String, f64> = BTreeMap::new();
    let mut models: BTreeMap<&str, Option<NaiveBayes>> = BTreeMap::new();
    let classes = ["false".to_string(), "true".to_string()];
    for c in labels {
        let examples: Vec<(SparseFeatures, String)> = training
            .iter()
            .map(|&i| &tp.groups[i])
            .filter(|g| &g.label == c)
            .map(|g| (target_features(features, g, Task::LikeCat), classes[usize::from(g.gold.is_some())].clone()))
            .collect();
        let pos = examples.iter().filter(|(_, l)| l == "true").count();
        prior.insert(
            c.clone(),
            if examples.is_empty() { 0.0 } else { pos as f64 / examples.len() as f64 },
        );
        // A category missing a class in training has no model; the prior
        // answers for it.
        models.insert(c, nb_train(&classes, &examples).ok());
    }
    let mut ratings: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for u in view.users() {
        for c in labels {
            if let Some(v) = view.value(&GroundAtom::new(like_cat(c), vec![u.to_string()])) {
                ratings.entry(u.to_string()).or_default().insert(c.clone(), v);
            }
        }
    }
    let cf = CfModel::new(
        features.iter().map(|(u, f)| (u.clone(), f.clone())).collect(),
        &ratings,
        labels.iter().map(|c| (c.clone(), c.clone())).collect(),
        prior.clone(),
        opts.cf.clone(),
    );
    let mut nb_scores = Vec::with_capacity(targets.len());
    let mut cf_scores = Vec::with_capacity(targets.len());
    let mut prior_scores = Vec::with_capacity(targets.len());
    for &i in targets {
        let g = &tp.groups[i];
        let f = target_features(features, g, Task::LikeCat);
        let p = prior[&g.label];
        nb_scores.push(vec![match &models[g.label.as_str()] {
            Some(m) => m.predict(&f)[1],
            None => p,
        }]);
        cf_scores.push(vec![cf.predict_vector(Some(&g.user), &f, &g.label)]);
        prior_scores.push(vec![p]);
    }
    Ok(vec![("nb", nb_scores), ("cf", cf_scores), ("prior", prior_scores)])
}

fn location_baselines(
    tp: &TaskProgram,
    features: &BTreeMap<String, SparseFeatures>,
    targets: &[usize],
    training: &[usize],
    opts: &EvalOptions,
) -> Result<Vec<NamedScores>> {
    let n = US_STATES.len();
    let state_index = |s: &str| US_STATES.iter().position(|x| *x == s);
    let unified = state_index(opts.population.unified())
        .ok_or_else(|| Error::Data(format!("population state `{}` is not a US state", opts.population.unified())))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.latent.seed);
    let mut random = Vec::with_capacity(targets.len());
    for _ in targets {
        let s = opts.population.sample(&mut rng);
        let k = state_index(s).ok_or_else(|| Error::Data(format!("population state `{s}` is not a US state")))?;
        random.push(one_hot(k, n));
    }

    let examples: Vec<(SparseFeatures, String)> = training
        .iter()
        .map(|&i| &tp.groups[i])
        .filter_map(|g| g.gold.map(|k| (target_features(features, g, Task::Location), US_STATES[k].to_string())))
        .collect();
    let seen: BTreeSet<&str> = examples.iter().map(|(_, l)| l.as_str()).collect();
    let classes: Vec<String> = US_STATES.iter().filter(|s| seen.contains(*s)).map(|s| s.to_string()).collect();
    let nb = if classes.is_empty() { None } else { Some(nb_train(&classes, &examples)?) };
    let nb_scores = targets
        .iter()
        .map(|&i| {
            let k = match &nb {
                Some(m) => state_index(m.predict_label(&target_features(features, &tp.groups[i], Task::Location)))
                    .expect("classes are states"),
                None => unified,
            };
            one_hot(k, n)
        })
        .collect();
    Ok(vec![
        ("nb", nb_scores),
        ("unified", vec![one_hot(unified, n); targets.len()]),
        ("random", random),
    ])
}
