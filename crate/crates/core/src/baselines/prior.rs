//! Popularity prior and population-based location baselines.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::error::{Error, Result};
use crate::extract::is_state;
use crate::social::SocialGraph;

/// 2020 census resident population in thousands.
pub const US_POPULATION: [(&str, u32); 50] = [
    ("AL", 5024), ("AK", 733), ("AZ", 7152), ("AR", 3012), ("CA", 39538),
    ("CO", 5774), ("CT", 3606), ("DE", 990), ("FL", 21538), ("GA", 10712),
    ("HI", 1455), ("ID", 1839), ("IL", 12813), ("IN", 6786), ("IA", 3190),
    ("KS", 2938), ("KY", 4506), ("LA", 4658), ("ME", 1362), ("MD", 6177),
    ("MA", 7030), ("MI", 10077), ("MN", 5706), ("MS", 2961), ("MO", 6154),
    ("MT", 1084), ("NE", 1962), ("NV", 3105), ("NH", 1377), ("NJ", 9289),
    ("NM", 2118), ("NY", 20201), ("NC", 10439), ("ND", 779), ("OH", 11799),
    ("OK", 3959), ("OR", 4237), ("PA", 13003), ("RI", 1097), ("SC", 5118),
    ("SD", 887), ("TN", 6911), ("TX", 29146), ("UT", 3272), ("VT", 643),
    ("VA", 8631), ("WA", 7705), ("WV", 1794), ("WI", 5894), ("WY", 577),
];

/// Share of users holding `Like(user, entity)` with value at least 0.5.
/// An empty graph gives 0.
pub fn p_entity(graph: &SocialGraph, entity: &str) -> f64 {
    let n = graph.num_users();
    if n == 0 {
        return 0.0;
    }
    let likes = graph
        .evidence()
        .iter()
        .filter(|(a, &v)| a.predicate == "Like" && a.args.len() == 2 && a.args[1] == entity && v >= 0.5)
        .count();
    likes as f64 / n as f64
}

/// State weights for the location baselines.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationTable {
    entries: Vec<(String, f64)>,
}

impl Default for PopulationTable {
    fn default() -> Self {
        PopulationTable {
            entries: US_POPULATION
                .iter()
                .map(|&(s, p)| (s.to_string(), f64::from(p)))
                .collect(),
        }
    }
}

impl PopulationTable {
    pub fn new(entries: Vec<(String, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Data("population table is empty".into()));
        }
        for (s, w) in &entries {
            if !is_state(s) {
                return Err(Error::Data(format!("unknown state code `{s}`")));
            }
            if !(*w >= 0.0 && w.is_finite()) {
                return Err(Error::Data(format!("bad weight {w} for `{s}`")));
            }
        }
        if entries.iter().all(|(_, w)| *w == 0.0) {
            return Err(Error::Data("population weights are all zero".into()));
        }
        Ok(PopulationTable { entries })
    }

    /// `state<TAB>weight` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (s, w) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(i + 1, 1, "expected state<TAB>weight"))?;
            let w = w
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(i + 1, 1, format!("bad weight `{}`", w.trim())))?;
            entries.push((s.trim().to_string(), w));
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    /// The most populated state; the first listed on ties.
    pub fn unified(&self) -> &str {
        let mut best = &self.entries[0];
        for e in &self.entries[1..] {
            if e.1 > best.1 {
                best = e;
            }
        }
        &best.0
    }

    /// Draws a state with probability proportional to its weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &str {
        let dist = WeightedIndex::new(self.entries.iter().map(|e| e.1)).expect("validated weights");
        &self.entries[dist.sample(rng)].0
    }
}
