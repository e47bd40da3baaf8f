//! Individual, friend-proportion and spouse features per user.

use std::collections::{BTreeMap, BTreeSet};

use crate::logic::GroundAtom;
use crate::social::{SocialGraph, SYMMETRIC_PREDICATES};

pub const SELF_BLOCK: &str = "self";
pub const FRIENDS_BLOCK: &str = "friends";
pub const SPOUSE_BLOCK: &str = "spouse";

/// Attribute key of a user-first atom: `Pred` or `Pred(rest,..)`.
pub fn attribute_key(atom: &GroundAtom) -> String {
    if atom.args.len() <= 1 {
        atom.predicate.clone()
    } else {
        format!("{}({})", atom.predicate, atom.args[1..].join(","))
    }
}

/// Attributes sharing a group are alternatives; a friend counts toward a
/// group's denominator when any of its attributes is known.
pub fn attribute_group(predicate: &str) -> &str {
    match predicate {
        "Male" | "Female" => "gender",
        p => p,
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureVector {
    /// The user's own attributes with confidences.
    pub individual: BTreeMap<String, f64>,
    /// Per attribute, the confidence-weighted share of friends holding it
    /// among friends with any known value for its group. `None` without
    /// friends.
    pub network: Option<BTreeMap<String, f64>>,
    /// The most confident spouse's attributes, scaled by that confidence.
    pub spouse: Option<BTreeMap<String, f64>>,
}

/// Flat features: `block:key` values plus the blocks that are masked.
/// Keys missing from an unmasked block read as 0.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseFeatures {
    pub values: BTreeMap<String, f64>,
    pub masked: BTreeSet<&'static str>,
}

impl SparseFeatures {
    pub fn block_of(key: &str) -> &str {
        key.split_once(':').map_or(key, |(b, _)| b)
    }

    /// Value of `key`, `None` when its block is masked.
    pub fn get(&self, key: &str) -> Option<f64> {
        if self.masked.contains(Self::block_of(key)) {
            None
        } else {
            Some(self.values.get(key).copied().unwrap_or(0.0))
        }
    }
}

impl FeatureVector {
    pub fn flatten(&self) -> SparseFeatures {
        let mut out = SparseFeatures::default();
        for (k, v) in &self.individual {
            out.values.insert(format!("{SELF_BLOCK}:{k}"), *v);
        }
        for (block, part) in [(FRIENDS_BLOCK, &self.network), (SPOUSE_BLOCK, &self.spouse)] {
            match part {
                Some(m) => {
                    for (k, v) in m {
                        out.values.insert(format!("{block}:{k}"), *v);
                    }
                }
                None => {
                    out.masked.insert(block);
                }
            }
        }
        out
    }
}

/// Per-user attribute tables of a graph, minus excluded atoms.
pub struct Featurizer<'g> {
    graph: &'g SocialGraph,
    /// user -> key -> (group, confidence)
    attrs: BTreeMap<&'g str, BTreeMap<String, (String, f64)>>,
}

impl<'g> Featurizer<'g> {
    pub fn new(graph: &'g SocialGraph) -> Self {
        Self::excluding(graph, |_| false)
    }

    /// Ignores atoms for which `exclude` holds, e.g. held-out targets.
    pub fn excluding(graph: &'g SocialGraph, exclude: impl Fn(&GroundAtom) -> bool) -> Self {
        let mut attrs: BTreeMap<&str, BTreeMap<String, (String, f64)>> = BTreeMap::new();
        for (atom, &v) in graph.evidence() {
            if atom.args.is_empty() || SYMMETRIC_PREDICATES.contains(&atom.predicate.as_str()) || exclude(atom) {
                continue;
            }
            attrs.entry(atom.args[0].as_str()).or_default().insert(
                attribute_key(atom),
                (attribute_group(&atom.predicate).to_string(), v),
            );
        }
        Featurizer { graph, attrs }
    }

    fn own(&self, user: &str) -> Option<&BTreeMap<String, (String, f64)>> {
        self.attrs.get(user)
    }

    pub fn featurize(&self, user: &str) -> FeatureVector {
        let individual = self
            .own(user)
            .map(|m| m.iter().map(|(k, (_, v))| (k.clone(), *v)).collect())
            .unwrap_or_default();
        let friends = self.graph.friends(user);
        let network = (!friends.is_empty()).then(|| {
            let mut num: BTreeMap<&str, f64> = BTreeMap::new();
            let mut key_group: BTreeMap<&str, &str> = BTreeMap::new();
            let mut den: BTreeMap<&str, f64> = BTreeMap::new();
            for (f, _) in &friends {
                let Some(m) = self.own(f) else { continue };
                let mut groups: BTreeSet<&str> = BTreeSet::new();
                for (k, (g, v)) in m {
                    *num.entry(k).or_default() += v;
                    key_group.insert(k, g);
                    groups.insert(g);
                }
                for g in groups {
                    *den.entry(g).or_default() += 1.0;
                }
            }
            num.into_iter()
                .map(|(k, n)| (k.to_string(), n / den[key_group[k]]))
                .collect()
        });
        let spouse = self.graph.spouse(user).map(|(s, conf)| {
            self.own(s)
                .map(|m| m.iter().map(|(k, (_, v))| (k.clone(), v * conf)).collect())
                .unwrap_or_default()
        });
        FeatureVector {
            individual,
            network,
            spouse,
        }
    }
}

/// Features of `user` over the whole graph.
pub fn featurize(user: &str, graph: &SocialGraph) -> FeatureVector {
    Featurizer::new(graph).featurize(user)
}
