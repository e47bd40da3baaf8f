//! Weight learning on datasets: fully observed (discriminative) and with
//! category preferences latent behind mentions (EM).

use std::collections::HashMap;

use super::dataset::Dataset;
use super::protocol::{task_program, Task};
use crate::error::Result;
use crate::logic::{GroundAtom, GroundedProgram, GroundingOptions, KnowledgeBase, RuleId, Weight};
use crate::mln::{em_learn, learn_weights, EmConfig, EmReport, LearnReport, MentionLink, MlnConfig, TrainingInstance};
use crate::social::{like_cat, CategorySet};

/// Dense group index per rule; rules that differ only in the
/// `LikeCat_<c>` category share a group. Hard rules stay alone. Groups are
/// numbered by first member.
pub fn tie_groups(kb: &KnowledgeBase, categories: &CategorySet) -> Vec<RuleId> {
    let mut first: HashMap<String, RuleId> = HashMap::new();
    let mut next = 0;
    kb.rules()
        .iter()
        .map(|r| {
            if r.weight.is_hard() {
                next += 1;
                return next - 1;
            }
            let text = r.to_string();
            let mut key = text.split_once(": ").map_or(text.as_str(), |(_, t)| t).to_string();
            for c in categories.labels() {
                key = key.replace(&format!("{}(", like_cat(c)), "LikeCat_{c}(");
            }
            *first.entry(key).or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

fn untie(weights: &[Weight], groups: &[RuleId]) -> Vec<Weight> {
    groups.iter().map(|&g| weights[g]).collect()
}

fn maybe_tie(program: GroundedProgram, groups: Option<&[RuleId]>) -> Result<GroundedProgram> {
    match groups {
        Some(g) => program.tie_rules(g),
        None => Ok(program),
    }
}

#[derive(Clone, Debug)]
pub struct LearnOptions {
    /// Share one weight across the per-category copies of a rule.
    pub tie_categories: bool,
    pub grounding: GroundingOptions,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            tie_categories: true,
            grounding: GroundingOptions::default(),
        }
    }
}

/// Learns the weights of `kb`'s rules from the dataset's gold values for
/// `task`. Returns one weight per rule of `kb`.
pub fn learn_dataset(
    kb: &KnowledgeBase,
    dataset: &Dataset,
    task: Task,
    cfg: &MlnConfig,
    opts: &LearnOptions,
) -> Result<LearnReport> {
    let tp = task_program(kb, dataset, task, &opts.grounding)?;
    let groups = opts.tie_categories.then(|| tie_groups(kb, dataset.categories()));
    let truth = tp.gold_values.iter().map(|&v| v >= 0.5).collect();
    let program = maybe_tie(tp.program, groups.as_deref())?;
    let mut report = learn_weights(&[TrainingInstance { program, truth }], cfg, None)?;
    if let Some(g) = &groups {
        report.weights = untie(&report.weights, g);
    }
    Ok(report)
}

/// EM with every `LikeCat_<c>(u)` latent. Each entity `e` labelled `c`
/// gives `LikeCat_<c>(u)` one mention slot, observed when
/// `MentionPos(u, e)` holds.
pub fn em_dataset(
    kb: &KnowledgeBase,
    dataset: &Dataset,
    cfg: &MlnConfig,
    em: &EmConfig,
    opts: &LearnOptions,
) -> Result<EmReport> {
    let tp = task_program(kb, dataset, Task::LikeCat, &opts.grounding)?;
    let cats = dataset.categories();
    let mut links = Vec::new();
    for g in &tp.groups {
        let ci = cats.index_of(&g.label).expect("group labels are categories");
        for e in dataset.graph.entities_in(&g.label) {
            let mention = GroundAtom::of("MentionPos", &[&g.user, e]);
            links.push(MentionLink {
                latent: g.atoms[0],
                observed: dataset.graph.value(&mention).is_some_and(|v| v >= 0.5),
                category: ci,
            });
        }
    }
    let groups = opts.tie_categories.then(|| tie_groups(kb, cats));
    let program = maybe_tie(tp.program, groups.as_deref())?;
    let mut report = em_learn(&program, &links, cats.labels(), cfg, em, None)?;
    if let Some(g) = &groups {
        report.weights = untie(&report.weights, g);
    }
    Ok(report)
}

/// Per-category report probability estimated from gold preferences:
/// observed mentions over mention slots of held preferences.
pub fn empirical_report_prob(dataset: &Dataset) -> Vec<f64> {
    let cats = dataset.categories();
    cats.labels()
        .iter()
        .map(|c| {
            let (mut hit, mut slots) = (0usize, 0usize);
            for u in dataset.graph.users() {
                if !dataset.gold_true(&GroundAtom::new(like_cat(c), vec![u.to_string()])) {
                    continue;
                }
                for e in dataset.graph.entities_in(c) {
                    slots += 1;
                    if dataset
                        .graph
                        .value(&GroundAtom::of("MentionPos", &[u, e]))
                        .is_some_and(|v| v >= 0.5)
                    {
                        hit += 1;
                    }
                }
            }
            if slots == 0 {
                0.0
            } else {
                hit as f64 / slots as f64
            }
        })
        .collect()
}
