use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::logic::{parse_evidence, read_text, EvidenceMap, GroundAtom};
use crate::social::{category_of_like_cat, like_cat, CategorySet, SocialGraph};

pub const CATEGORY_SET_FILE: &str = "category_set.txt";
pub const CATEGORIES_FILE: &str = "categories.tsv";
pub const EVIDENCE_FILE: &str = "evidence.txt";
pub const GOLD_FILE: &str = "gold.txt";
pub const FOLLOWS_FILE: &str = "follows.tsv";

/// Observed graph plus gold values for the evaluated predicates. Gold is
/// closed-world: a missing gold atom reads as false.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub graph: SocialGraph,
    pub gold: EvidenceMap,
}

impl Dataset {
    /// Users named in gold atoms join the graph.
    pub fn new(mut graph: SocialGraph, gold: EvidenceMap) -> Result<Self> {
        for (a, &v) in &gold {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    what: format!("gold {a}"),
                    value: v,
                });
            }
            if (a.predicate == "LiveIn" || category_of_like_cat(&a.predicate).is_some()) && !a.args.is_empty() {
                graph.add_user(&a.args[0]);
            }
        }
        Ok(Dataset { graph, gold })
    }

    /// Gold taken from the graph itself: `LiveIn` atoms as given and
    /// `LikeCat_<c>(u)` true when `u` likes an entity labelled `c`.
    pub fn from_graph(graph: SocialGraph) -> Result<Self> {
        let mut gold = EvidenceMap::new();
        for (a, &v) in graph.evidence() {
            if a.predicate == "LiveIn" {
                gold.insert(a.clone(), v);
            }
        }
        let mut liked: BTreeMap<(&str, &str), ()> = BTreeMap::new();
        for (a, &v) in graph.evidence() {
            if a.predicate == "Like" && a.args.len() == 2 && v >= 0.5 {
                if let Some(c) = graph.entities().get(&a.args[1]) {
                    liked.insert((a.args[0].as_str(), c.as_str()), ());
                }
            }
        }
        for u in graph.users() {
            for c in graph.categories().labels() {
                let v = f64::from(u8::from(liked.contains_key(&(u, c.as_str()))));
                gold.insert(GroundAtom::new(like_cat(c), vec![u.to_string()]), v);
            }
        }
        Dataset::new(graph, gold)
    }

    pub fn categories(&self) -> &CategorySet {
        self.graph.categories()
    }

    pub fn gold_true(&self, atom: &GroundAtom) -> bool {
        self.gold.get(atom).is_some_and(|&v| v >= 0.5)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, text: String| {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(p, e))
        };
        write(CATEGORY_SET_FILE, self.categories().labels().join("\n") + "\n")?;
        write(CATEGORIES_FILE, self.graph.categories_to_string())?;
        write(EVIDENCE_FILE, self.graph.evidence_to_string())?;
        let mut gold = String::new();
        for (a, v) in &self.gold {
            gold.push_str(&format!("{a} {v}\n"));
        }
        write(GOLD_FILE, gold)?;
        write(FOLLOWS_FILE, self.graph.follows_to_string())
    }

    /// Loads a directory written by [`save`](Self::save). Without a gold
    /// file, gold is derived from the graph; without a category set file,
    /// the default labels apply.
    pub fn load(dir: &Path) -> Result<Self> {
        let opt = |name: &str| -> Result<Option<String>> {
            let p = dir.join(name);
            if p.exists() {
                read_text(&p).map(Some)
            } else {
                Ok(None)
            }
        };
        let categories = match opt(CATEGORY_SET_FILE)? {
            Some(t) => {
                let labels: Vec<&str> = t.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
                CategorySet::new(&labels)?
            }
            None => CategorySet::default(),
        };
        let evidence = read_text(dir.join(EVIDENCE_FILE))?;
        let cats = opt(CATEGORIES_FILE)?.unwrap_or_default();
        let follows = opt(FOLLOWS_FILE)?;
        let graph = SocialGraph::from_texts(categories, &evidence, &cats, follows.as_deref())?;
        match opt(GOLD_FILE)? {
            Some(t) => Dataset::new(graph, parse_evidence(&t)?),
            None => Dataset::from_graph(graph),
        }
    }
}
