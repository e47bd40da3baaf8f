//! User-based weighted nearest neighbours with categorical item similarity.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::features::{Featurizer, SparseFeatures};
use super::prior::p_entity;
use crate::social::SocialGraph;

#[derive(Clone, Debug)]
pub struct CfConfig {
    pub top_k: usize,
    /// Similarity between items of different categories.
    pub cross_category: f64,
    /// Per-feature weight in the cosine; unlisted features weigh 1.
    pub feature_weights: BTreeMap<String, f64>,
}

impl Default for CfConfig {
    fn default() -> Self {
        CfConfig {
            top_k: 20,
            cross_category: 0.2,
            feature_weights: BTreeMap::new(),
        }
    }
}

pub struct CfModel {
    users: Vec<String>,
    vectors: Vec<Vec<(String, f64)>>,
    norms: Vec<f64>,
    /// user index -> item -> rating in [0, 1]
    ratings: Vec<BTreeMap<String, f64>>,
    item_category: BTreeMap<String, String>,
    prior: BTreeMap<String, f64>,
    cfg: CfConfig,
}

impl CfModel {
    /// `features` gives every user's vector (masked blocks ignored);
    /// `ratings` the known user-item ratings; `prior` the fallback score.
    pub fn new(
        features: Vec<(String, SparseFeatures)>,
        ratings: &BTreeMap<String, BTreeMap<String, f64>>,
        item_category: BTreeMap<String, String>,
        prior: BTreeMap<String, f64>,
        cfg: CfConfig,
    ) -> Self {
        let mut users = Vec::with_capacity(features.len());
        let mut vectors = Vec::with_capacity(features.len());
        let mut rs = Vec::with_capacity(features.len());
        for (u, f) in features {
            let v: Vec<(String, f64)> = f.values.into_iter().filter(|(_, x)| *x != 0.0).collect();
            rs.push(ratings.get(&u).cloned().unwrap_or_default());
            users.push(u);
            vectors.push(v);
        }
        let mut model = CfModel {
            users,
            vectors,
            norms: Vec::new(),
            ratings: rs,
            item_category,
            prior,
            cfg,
        };
        model.norms = model.vectors.iter().map(|v| model.norm(v)).collect();
        model
    }

    fn norm(&self, v: &[(String, f64)]) -> f64 {
        v.iter()
            .map(|(k, x)| self.cfg.feature_weights.get(k).copied().unwrap_or(1.0) * x * x)
            .sum::<f64>()
            .sqrt()
    }

    fn cosine(&self, va: &[(String, f64)], na: f64, b: usize) -> f64 {
        if na == 0.0 || self.norms[b] == 0.0 {
            return 0.0;
        }
        let vb = &self.vectors[b];
        let (mut i, mut j, mut dot) = (0, 0, 0.0);
        while i < va.len() && j < vb.len() {
            match va[i].0.cmp(&vb[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let w = self.cfg.feature_weights.get(&va[i].0).copied().unwrap_or(1.0);
                    dot += w * va[i].1 * vb[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        dot / (na * self.norms[b])
    }

    fn item_similarity(&self, a: &str, b: &str) -> f64 {
        if a == b {
            return 1.0;
        }
        match (self.item_category.get(a), self.item_category.get(b)) {
            (Some(x), Some(y)) if x == y => 1.0,
            _ => self.cfg.cross_category,
        }
    }

    pub fn prior(&self, item: &str) -> f64 {
        self.prior.get(item).copied().unwrap_or(0.0)
    }

    /// Similarity-weighted average of the top-k neighbours' ratings, with
    /// each rating weighted by item similarity. Falls back to the item prior
    /// when no neighbour with ratings has positive similarity.
    pub fn predict(&self, user: &str, item: &str) -> f64 {
        match self.users.iter().position(|x| x == user) {
            Some(u) => self.predict_from(&self.vectors[u], self.norms[u], Some(u), item),
            None => self.prior(item),
        }
    }

    /// As [`CfModel::predict`] for an explicit feature vector; `user`, when
    /// known to the model, is excluded from its own neighbours.
    pub fn predict_vector(&self, user: Option<&str>, features: &SparseFeatures, item: &str) -> f64 {
        let v: Vec<(String, f64)> = features
            .values
            .iter()
            .filter(|(_, x)| **x != 0.0)
            .map(|(k, x)| (k.clone(), *x))
            .collect();
        let skip = user.and_then(|u| self.users.iter().position(|x| x == u));
        self.predict_from(&v, self.norm(&v), skip, item)
    }

    fn predict_from(&self, v: &[(String, f64)], norm: f64, skip: Option<usize>, item: &str) -> f64 {
        let mut neigh: Vec<(f64, usize)> = (0..self.users.len())
            .filter(|&o| Some(o) != skip && !self.ratings[o].is_empty())
            .map(|o| (self.cosine(v, norm, o), o))
            .filter(|(s, _)| *s > 0.0)
            .collect();
        neigh.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        neigh.truncate(self.cfg.top_k);
        let (mut num, mut den) = (0.0, 0.0);
        for (s, o) in neigh {
            for (other, r) in &self.ratings[o] {
                let w = s * self.item_similarity(item, other);
                num += w * r;
                den += w;
            }
        }
        if den > 0.0 {
            (num / den).clamp(0.0, 1.0)
        } else {
            self.prior(item)
        }
    }

    pub fn predict_many(&self, pairs: &[(String, String)]) -> Vec<f64> {
        pairs.par_iter().map(|(u, i)| self.predict(u, i)).collect()
    }
}

/// Entity ratings from a graph: `Like` reads as 1 and `Dislike` as 0.
pub fn entity_ratings(graph: &SocialGraph) -> BTreeMap<String, BTreeMap<String, f64>> {
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for (a, &v) in graph.evidence() {
        if a.args.len() != 2 || v < 0.5 {
            continue;
        }
        let r = match a.predicate.as_str() {
            "Like" => 1.0,
            "Dislike" => 0.0,
            _ => continue,
        };
        out.entry(a.args[0].clone()).or_default().insert(a.args[1].clone(), r);
    }
    out
}

/// Scores `entity` for `user` from the graph's own likes and features.
pub fn cf_predict(user: &str, entity: &str, graph: &SocialGraph, cfg: &CfConfig) -> f64 {
    let fz = Featurizer::new(graph);
    let features = graph
        .users()
        .map(|u| (u.to_string(), fz.featurize(u).flatten()))
        .collect();
    let prior = graph
        .entities()
        .keys()
        .map(|e| (e.clone(), p_entity(graph, e)))
        .collect();
    CfModel::new(features, &entity_ratings(graph), graph.entities().clone(), prior, cfg.clone())
        .predict(user, entity)
}
