//! Rule-based predicate extractors: home state from geotagged activity,
//! gender from first names, spouse confidence, friendship and celebrity likes
//! from follow edges. All extractors are pure and ignore input order.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::logic::{EvidenceMap, GroundAtom};
use crate::social::FollowEdge;

/// Two-letter codes of the 50 US states.
pub const US_STATES: [&str; 50] = [
    "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "FL", "GA", "HI", "ID", "IL", "IN", "IA", "KS",
    "KY", "LA", "ME", "MD", "MA", "MI", "MN", "MS", "MO", "MT", "NE", "NV", "NH", "NJ", "NM", "NY",
    "NC", "ND", "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT", "VT", "VA", "WA", "WV",
    "WI", "WY",
];

/// A state must have strictly more tweets than this.
pub const MIN_TWEETS_EXCLUSIVE: usize = 10;
pub const MIN_DISTINCT_MONTHS: usize = 3;
pub const GENDER_RATIO: u64 = 20;
pub const SPOUSE_THRESHOLD: f64 = 0.5;
/// A followed account needs strictly more followers than this.
pub const CELEBRITY_FOLLOWERS_EXCLUSIVE: u64 = 100_000;

pub fn is_state(code: &str) -> bool {
    US_STATES.contains(&code)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeoEvent {
    pub user: String,
    pub state: String,
    pub year: u16,
    pub month: u8,
}

impl GeoEvent {
    pub fn new(user: &str, state: &str, year: u16, month: u8) -> Result<Self> {
        if !is_state(state) {
            return Err(Error::Data(format!("unknown state code `{state}`")));
        }
        if !(1..=12).contains(&month) {
            return Err(Error::Data(format!("month {month} out of range")));
        }
        Ok(GeoEvent {
            user: user.to_string(),
            state: state.to_string(),
            year,
            month,
        })
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (i + 1, line.split('\t').map(str::trim).collect()))
    })
}

/// `user<TAB>state<TAB>YYYY-MM` lines.
pub fn parse_geo_events(text: &str) -> Result<Vec<GeoEvent>> {
    data_lines(text)
        .map(|(line, f)| {
            let bad = |m: &str| Error::parse(line, 1, m.to_string());
            if f.len() != 3 {
                return Err(bad("expected user<TAB>state<TAB>YYYY-MM"));
            }
            let (y, m) = f[2].split_once('-').ok_or_else(|| bad("expected YYYY-MM"))?;
            let year = y.parse().map_err(|_| bad("bad year"))?;
            let month = m.parse().map_err(|_| bad("bad month"))?;
            GeoEvent::new(f[0], f[1], year, month).map_err(|e| bad(&e.to_string()))
        })
        .collect()
}

/// Home state of one user: the state with the most tweets among those with
/// more than ten tweets over at least three distinct months. A tie for the
/// top count yields `None`.
pub fn infer_location(events: &[GeoEvent]) -> Option<String> {
    // State to (tweet count, distinct (year, month) pairs).
    type Tally<'a> = BTreeMap<&'a str, (usize, BTreeSet<(u16, u8)>)>;
    let mut per_state: Tally<'_> = BTreeMap::new();
    for e in events {
        let s = per_state.entry(&e.state).or_default();
        s.0 += 1;
        s.1.insert((e.year, e.month));
    }
    let mut best: Option<(&str, usize)> = None;
    let mut tied = false;
    for (state, (count, months)) in per_state {
        if count <= MIN_TWEETS_EXCLUSIVE || months.len() < MIN_DISTINCT_MONTHS {
            continue;
        }
        match best {
            Some((_, c)) if c > count => {}
            Some((_, c)) if c == count => tied = true,
            _ => {
                best = Some((state, count));
                tied = false;
            }
        }
    }
    if tied {
        None
    } else {
        best.map(|(s, _)| s.to_string())
    }
}

/// [`infer_location`] applied per user.
pub fn infer_locations(events: &[GeoEvent]) -> BTreeMap<String, String> {
    let mut by_user: BTreeMap<&str, Vec<GeoEvent>> = BTreeMap::new();
    for e in events {
        by_user.entry(&e.user).or_default().push(e.clone());
    }
    let users: Vec<(&str, Vec<GeoEvent>)> = by_user.into_iter().collect();
    users
        .par_iter()
        .filter_map(|(u, ev)| infer_location(ev).map(|s| (u.to_string(), s)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn predicate(self) -> &'static str {
        match self {
            Gender::Male => "Male",
            Gender::Female => "Female",
        }
    }
}

/// First name (case-insensitive) to (male, female) birth counts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NameGenderTable {
    counts: BTreeMap<String, (u64, u64)>,
}

impl NameGenderTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds counts; repeated names accumulate.
    pub fn insert(&mut self, name: &str, male: u64, female: u64) {
        let e = self.counts.entry(name.to_lowercase()).or_default();
        e.0 += male;
        e.1 += female;
    }

    pub fn get(&self, name: &str) -> Option<(u64, u64)> {
        self.counts.get(&name.to_lowercase()).copied()
    }

    /// `name<TAB>male_count<TAB>female_count` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut t = NameGenderTable::new();
        for (line, f) in data_lines(text) {
            if f.len() != 3 {
                return Err(Error::parse(line, 1, "expected name<TAB>male<TAB>female"));
            }
            let male = f[1]
                .parse()
                .map_err(|_| Error::parse(line, 1, format!("bad count `{}`", f[1])))?;
            let female = f[2]
                .parse()
                .map_err(|_| Error::parse(line, 1, format!("bad count `{}`", f[2])))?;
            t.insert(f[0], male, female);
        }
        Ok(t)
    }
}

/// Gender when one count is at least twenty times the other.
pub fn infer_gender(first_name: &str, table: &NameGenderTable) -> Option<Gender> {
    let (m, f) = table.get(first_name)?;
    if m == 0 && f == 0 {
        return None;
    }
    if f >= GENDER_RATIO.saturating_mul(m) {
        Some(Gender::Female)
    } else if m >= GENDER_RATIO.saturating_mul(f) {
        Some(Gender::Male)
    } else {
        None
    }
}

/// `user<TAB>first_name` lines.
pub fn parse_user_names(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (line, f) in data_lines(text) {
        if f.len() != 2 {
            return Err(Error::parse(line, 1, "expected user<TAB>first_name"));
        }
        out.insert(f[0].to_string(), f[1].to_string());
    }
    Ok(out)
}

/// Confidence of a spouse relation from the external scorer's output:
/// none at or below 0.5, otherwise rescaled linearly onto (0, 1].
pub fn spouse_confidence(score: f64) -> Result<Option<f64>> {
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::OutOfRange {
            what: "spouse score".into(),
            value: score,
        });
    }
    if score <= SPOUSE_THRESHOLD {
        Ok(None)
    } else {
        Ok(Some((score - SPOUSE_THRESHOLD) / (1.0 - SPOUSE_THRESHOLD)))
    }
}

/// `userA<TAB>userB<TAB>score` lines.
pub fn parse_spouse_scores(text: &str) -> Result<Vec<(String, String, f64)>> {
    data_lines(text)
        .map(|(line, f)| {
            if f.len() != 3 {
                return Err(Error::parse(line, 1, "expected userA<TAB>userB<TAB>score"));
            }
            let s = f[2]
                .parse::<f64>()
                .map_err(|_| Error::parse(line, 1, format!("bad score `{}`", f[2])))?;
            Ok((f[0].to_string(), f[1].to_string(), s))
        })
        .collect()
}

/// Friend and celebrity-like pairs derived from follow edges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NetworkAtoms {
    /// Both orientations of every mutual-follow pair.
    pub friends: BTreeSet<(String, String)>,
    /// (user, account) for one-way follows of accounts above the threshold.
    pub likes: BTreeSet<(String, String)>,
}

pub fn derive_network_atoms(edges: &[FollowEdge]) -> NetworkAtoms {
    let mut follows: BTreeSet<(&str, &str)> = BTreeSet::new();
    let mut followers: BTreeMap<&str, u64> = BTreeMap::new();
    for e in edges {
        if e.follower == e.followee {
            continue;
        }
        follows.insert((&e.follower, &e.followee));
        let c = followers.entry(&e.followee).or_default();
        *c = (*c).max(e.followee_followers);
    }
    let mut out = NetworkAtoms::default();
    for &(a, b) in &follows {
        if follows.contains(&(b, a)) {
            out.friends.insert((a.to_string(), b.to_string()));
        } else if followers[b] > CELEBRITY_FOLLOWERS_EXCLUSIVE {
            out.likes.insert((a.to_string(), b.to_string()));
        }
    }
    out
}

/// Extractor inputs; any subset may be present.
#[derive(Clone, Debug, Default)]
pub struct ExtractInputs {
    pub geo: Vec<GeoEvent>,
    pub names: Option<NameGenderTable>,
    pub user_names: BTreeMap<String, String>,
    pub spouse_scores: Vec<(String, String, f64)>,
    pub follows: Vec<FollowEdge>,
}

/// Runs every extractor and collects the resulting evidence atoms. Spouse
/// pairs scored twice keep the higher confidence.
pub fn extract_evidence(inputs: &ExtractInputs) -> Result<EvidenceMap> {
    let mut ev = EvidenceMap::new();
    for (u, s) in infer_locations(&inputs.geo) {
        ev.insert(GroundAtom::new("LiveIn", vec![u, s]), 1.0);
    }
    if let Some(table) = &inputs.names {
        for (u, name) in &inputs.user_names {
            if let Some(g) = infer_gender(name, table) {
                ev.insert(GroundAtom::new(g.predicate(), vec![u.clone()]), 1.0);
            }
        }
    }
    for (a, b, s) in &inputs.spouse_scores {
        if a == b {
            continue;
        }
        if let Some(c) = spouse_confidence(*s)? {
            for (x, y) in [(a, b), (b, a)] {
                let slot = ev
                    .entry(GroundAtom::new("Spouse", vec![x.clone(), y.clone()]))
                    .or_insert(0.0);
                *slot = slot.max(c);
            }
        }
    }
    let net = derive_network_atoms(&inputs.follows);
    for (a, b) in net.friends {
        ev.insert(GroundAtom::new("Friend", vec![a, b]), 1.0);
    }
    for (u, c) in net.likes {
        ev.insert(GroundAtom::new("Like", vec![u, c]), 1.0);
    }
    Ok(ev)
}
