//! Synthetic social networks with a planted model.
//!
//! Users form fixed-size blocks; friendships and marriages stay inside a
//! block, so every (block, category) component of the planted program is
//! small enough to sample exactly. Category preferences are drawn from the
//! planted MLN; entity likes, dislikes, mentions and home states are drawn
//! afterwards from independent coin flips.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::Dataset;
use crate::baselines::PopulationTable;
use crate::error::{Error, Result};
use crate::logic::{EvidenceMap, GroundAtom, GroundingOptions, KnowledgeBase, Role, USER_SORT};
use crate::mln::{sample_world, MlnConfig, EXACT_ATOM_LIMIT};
use crate::social::{declare_category_predicates, default_schema, like_cat, CategorySet, SocialGraph};

/// Rule text where `{c}` stands for each category label; templates
/// without it are instantiated once.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedRule {
    pub template: String,
    pub weight: f64,
}

impl PlantedRule {
    pub fn new(template: &str, weight: f64) -> Self {
        PlantedRule {
            template: template.to_string(),
            weight,
        }
    }
}

pub const FRIEND_HOMOPHILY: &str = "Friend(a,b) & LikeCat_{c}(a) => LikeCat_{c}(b)";
pub const SPOUSE_HOMOPHILY: &str = "Spouse(a,b) & LikeCat_{c}(a) => LikeCat_{c}(b)";
pub const MALE_PREFERENCE: &str = "Male(u) => LikeCat_{c}(u)";
pub const PREFERENCE_PRIOR: &str = "LikeCat_{c}(u)";
pub const LOCATION_HOMOPHILY: &str = "Friend(a,b) & LiveIn(a,s) => LiveIn(b,s)";

#[derive(Clone, Debug)]
pub struct SynthParams {
    pub users: usize,
    pub block_size: usize,
    /// Probability of each within-block friendship.
    pub density: f64,
    /// Probability that a block contains one married pair.
    pub spouse_rate: f64,
    pub male_rate: f64,
    pub categories: CategorySet,
    pub entities_per_category: usize,
    pub planted: Vec<PlantedRule>,
    /// Mention probability of a held preference, per category.
    pub report_prob: Vec<f64>,
    /// Probability that a user without a category preference dislikes it.
    pub dislike_rate: f64,
    /// Probability that a user lives in the block's home state.
    pub home_rate: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        let categories = CategorySet::default();
        let n = categories.len();
        SynthParams {
            users: 500,
            block_size: 5,
            density: 0.6,
            spouse_rate: 0.5,
            male_rate: 0.5,
            categories,
            entities_per_category: 3,
            planted: vec![
                PlantedRule::new(PREFERENCE_PRIOR, 0.0),
                PlantedRule::new(FRIEND_HOMOPHILY, 2.0),
            ],
            report_prob: vec![0.5; n],
            dislike_rate: 0.3,
            home_rate: 0.8,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn with_report_prob(mut self, s: f64) -> Self {
        self.report_prob = vec![s; self.categories.len()];
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |what: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} must lie in [0, 1], got {v}")))
            }
        };
        unit("density", self.density)?;
        unit("spouse rate", self.spouse_rate)?;
        unit("male rate", self.male_rate)?;
        unit("dislike rate", self.dislike_rate)?;
        unit("home rate", self.home_rate)?;
        if self.users == 0 || self.block_size == 0 || self.entities_per_category == 0 {
            return Err(Error::Config("users, block size and entities per category must be positive".into()));
        }
        if self.report_prob.len() != self.categories.len() {
            return Err(Error::Config(format!(
                "{} report probabilities for {} categories",
                self.report_prob.len(),
                self.categories.len()
            )));
        }
        for &s in &self.report_prob {
            unit("report probability", s)?;
        }
        for p in &self.planted {
            if !p.weight.is_finite() {
                return Err(Error::Config(format!("planted weight for `{}` is not finite", p.template)));
            }
        }
        Ok(())
    }
}

/// Rule-file lines for the planted templates; `weight` overrides the
/// planted weights when given.
pub fn expand_templates(planted: &[PlantedRule], categories: &CategorySet, weight: Option<f64>) -> String {
    let mut out = String::new();
    for p in planted {
        let w = weight.unwrap_or(p.weight);
        if p.template.contains("{c}") {
            for c in categories.labels() {
                out.push_str(&format!("{w}: {}\n", p.template.replace("{c}", c)));
            }
        } else {
            out.push_str(&format!("{w}: {}\n", p.template));
        }
    }
    out
}

/// `w: MentionPos(u,@e) => LikeCat_<c>(u)` for every labelled entity.
pub fn mention_rules(graph: &SocialGraph, weight: f64) -> String {
    graph
        .entities()
        .iter()
        .map(|(e, c)| format!("{weight}: MentionPos(u,@{e}) => {}(u)\n", like_cat(c)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct SynthData {
    pub dataset: Dataset,
    /// Planted rules at their true weights.
    pub planted_rules: String,
    /// The same rules at weight 0, as a learning starting point.
    pub template_rules: String,
}

pub fn user_name(i: usize, total: usize) -> String {
    let width = total.saturating_sub(1).to_string().len().max(3);
    format!("u{i:0width$}")
}

pub fn entity_name(category: &str, k: usize) -> String {
    format!("{category}_{}", k + 1)
}

pub fn synth_generate(params: &SynthParams) -> Result<SynthData> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let cats = &params.categories;
    let users: Vec<String> = (0..params.users).map(|i| user_name(i, params.users)).collect();
    let mut graph = SocialGraph::new(cats.clone());
    for u in &users {
        graph.add_user(u);
    }
    for c in cats.labels() {
        for k in 0..params.entities_per_category {
            graph.add_entity(&entity_name(c, k), c)?;
        }
    }

    let mut structure = EvidenceMap::new();
    for u in &users {
        let g = if rng.gen_bool(params.male_rate) { "Male" } else { "Female" };
        structure.insert(GroundAtom::of(g, &[u]), 1.0);
    }
    let blocks: Vec<&[String]> = users.chunks(params.block_size).collect();
    for block in &blocks {
        for i in 0..block.len() {
            for j in i + 1..block.len() {
                if rng.gen_bool(params.density) {
                    structure.insert(GroundAtom::of("Friend", &[&block[i], &block[j]]), 1.0);
                    structure.insert(GroundAtom::of("Friend", &[&block[j], &block[i]]), 1.0);
                }
            }
        }
        if block.len() >= 2 && rng.gen_bool(params.spouse_rate) {
            let i = rng.gen_range(0..block.len());
            let mut j = rng.gen_range(0..block.len() - 1);
            if j >= i {
                j += 1;
            }
            structure.insert(GroundAtom::of("Spouse", &[&block[i], &block[j]]), 1.0);
            structure.insert(GroundAtom::of("Spouse", &[&block[j], &block[i]]), 1.0);
        }
    }

    let planted_rules = expand_templates(&params.planted, cats, None);
    let template_rules = expand_templates(&params.planted, cats, Some(0.0));
    let mut kb: KnowledgeBase = default_schema();
    declare_category_predicates(&mut kb, cats, Role::Query)?;
    crate::logic::parse_rule_file(&planted_rules, &mut kb)?;
    for u in &users {
        kb.add_constant(USER_SORT, u);
    }
    let open: Vec<GroundAtom> = users
        .iter()
        .flat_map(|u| cats.labels().iter().map(move |c| GroundAtom::new(like_cat(c), vec![u.clone()])))
        .collect();
    let program = crate::logic::ground_with(&kb, &structure, &GroundingOptions::default(), &open)?;
    let cfg = MlnConfig {
        seed: rng.gen(),
        max_exact_atoms: EXACT_ATOM_LIMIT,
        ..MlnConfig::default()
    };
    let world = sample_world(&program, &cfg)?;

    let mut gold = EvidenceMap::new();
    for a in &open {
        let id = program.atom_id(a).expect("open atoms are interned");
        gold.insert(a.clone(), f64::from(u8::from(world[id])));
    }
    for (a, v) in structure {
        graph.set(a, v)?;
    }
    for u in &users {
        for (ci, c) in cats.labels().iter().enumerate() {
            let likes = gold[&GroundAtom::new(like_cat(c), vec![u.clone()])] == 1.0;
            let dislikes = !likes && rng.gen_bool(params.dislike_rate);
            let s = params.report_prob[ci];
            for k in 0..params.entities_per_category {
                let e = entity_name(c, k);
                let (pred, mention) = match (likes, dislikes) {
                    (true, _) => ("Like", "MentionPos"),
                    (false, true) => ("Dislike", "MentionNeg"),
                    (false, false) => continue,
                };
                gold.insert(GroundAtom::of(pred, &[u, &e]), 1.0);
                if rng.gen_bool(s) {
                    graph.set(GroundAtom::of(mention, &[u, &e]), 1.0)?;
                }
            }
        }
    }
    let population = PopulationTable::default();
    for block in &blocks {
        let home = population.sample(&mut rng).to_string();
        for u in block.iter() {
            let state = if rng.gen_bool(params.home_rate) {
                home.clone()
            } else {
                population.sample(&mut rng).to_string()
            };
            gold.insert(GroundAtom::of("LiveIn", &[u, &state]), 1.0);
        }
    }
    Ok(SynthData {
        dataset: Dataset::new(graph, gold)?,
        planted_rules,
        template_rules,
    })
}
