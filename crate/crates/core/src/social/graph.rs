use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::ops::Bound;

use super::{category_of_like_cat, default_schema, CategorySet};
use crate::error::{Error, Result};
use crate::logic::{EvidenceMap, GroundAtom, KnowledgeBase, ENTITY_SORT, USER_SORT};

/// Directed follow edge with the followee's follower count.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FollowEdge {
    pub follower: String,
    pub followee: String,
    pub followee_followers: u64,
}

/// `follower<TAB>followee<TAB>followee_follower_count` lines.
pub fn parse_follow_edges(text: &str) -> Result<Vec<FollowEdge>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').map(str::trim).collect();
        if parts.len() != 3 || parts[0].is_empty() || parts[1].is_empty() {
            return Err(Error::parse(lineno + 1, 1, "expected follower<TAB>followee<TAB>count"));
        }
        let count = parts[2]
            .parse::<u64>()
            .map_err(|_| Error::parse(lineno + 1, 1, format!("bad follower count `{}`", parts[2])))?;
        out.push(FollowEdge {
            follower: parts[0].to_string(),
            followee: parts[1].to_string(),
            followee_followers: count,
        });
    }
    Ok(out)
}

/// Users, labelled entities, follow edges and evidence atoms with
/// confidences in [0, 1].
#[derive(Clone, Debug)]
pub struct SocialGraph {
    categories: CategorySet,
    users: BTreeSet<String>,
    entities: BTreeMap<String, String>,
    follows: Vec<FollowEdge>,
    evidence: EvidenceMap,
    user_slots: BTreeMap<String, Vec<bool>>,
}

impl SocialGraph {
    pub fn new(categories: CategorySet) -> Self {
        let kb = default_schema();
        let user_slots = kb
            .schemas()
            .iter()
            .map(|s| (s.name.clone(), s.arg_types.iter().map(|t| t == USER_SORT).collect()))
            .collect();
        SocialGraph {
            categories,
            users: BTreeSet::new(),
            entities: BTreeMap::new(),
            follows: Vec::new(),
            evidence: EvidenceMap::new(),
            user_slots,
        }
    }

    pub fn categories(&self) -> &CategorySet {
        &self.categories
    }

    pub fn users(&self) -> impl Iterator<Item = &str> {
        self.users.iter().map(String::as_str)
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn has_user(&self, user: &str) -> bool {
        self.users.contains(user)
    }

    pub fn add_user(&mut self, user: &str) {
        self.users.insert(user.to_string());
    }

    /// Entity to category label.
    pub fn entities(&self) -> &BTreeMap<String, String> {
        &self.entities
    }

    pub fn entities_in(&self, category: &str) -> impl Iterator<Item = &str> {
        let category = category.to_string();
        self.entities
            .iter()
            .filter(move |(_, c)| **c == category)
            .map(|(e, _)| e.as_str())
    }

    pub fn add_entity(&mut self, entity: &str, category: &str) -> Result<()> {
        if !self.categories.contains(category) {
            return Err(Error::Data(format!(
                "entity `{entity}` has unknown category `{category}`"
            )));
        }
        self.entities.insert(entity.to_string(), category.to_string());
        Ok(())
    }

    pub fn follows(&self) -> &[FollowEdge] {
        &self.follows
    }

    pub fn add_follow(&mut self, edge: FollowEdge) {
        self.add_user(&edge.follower);
        self.add_user(&edge.followee);
        self.follows.push(edge);
    }

    pub fn evidence(&self) -> &EvidenceMap {
        &self.evidence
    }

    pub fn value(&self, atom: &GroundAtom) -> Option<f64> {
        self.evidence.get(atom).copied()
    }

    fn slots(&self, predicate: &str) -> Option<Vec<bool>> {
        if category_of_like_cat(predicate).is_some() {
            return Some(vec![true]);
        }
        self.user_slots.get(predicate).cloned()
    }

    /// Records an evidence atom. Arguments in user slots join the user set.
    pub fn set(&mut self, atom: GroundAtom, value: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfRange {
                what: atom.to_string(),
                value,
            });
        }
        let slots = self
            .slots(&atom.predicate)
            .ok_or_else(|| Error::UnknownPredicate(atom.predicate.clone()))?;
        if slots.len() != atom.args.len() {
            return Err(Error::Arity {
                predicate: atom.predicate.clone(),
                expected: slots.len(),
                found: atom.args.len(),
            });
        }
        for (a, is_user) in atom.args.iter().zip(slots) {
            if is_user {
                self.users.insert(a.clone());
            }
        }
        self.evidence.insert(atom, value);
        Ok(())
    }

    pub fn remove(&mut self, atom: &GroundAtom) -> Option<f64> {
        self.evidence.remove(atom)
    }

    /// Evidence atoms of `predicate` whose first argument is `first`.
    pub fn atoms_of<'a>(&'a self, predicate: &str, first: &str) -> impl Iterator<Item = (&'a GroundAtom, f64)> + 'a {
        let lo = GroundAtom::new(predicate, vec![first.to_string()]);
        let hi = GroundAtom::new(predicate, vec![format!("{first}\u{0}")]);
        self.evidence
            .range((Bound::Included(lo), Bound::Excluded(hi)))
            .map(|(a, &v)| (a, v))
    }

    /// Second arguments of positive `relation(user, _)` atoms with their
    /// confidences.
    pub fn related<'a>(&'a self, relation: &str, user: &str) -> Vec<(&'a str, f64)> {
        self.atoms_of(relation, user)
            .filter(|(a, v)| a.args.len() == 2 && *v > 0.0)
            .map(|(a, v)| (a.args[1].as_str(), v))
            .collect()
    }

    pub fn friends<'a>(&'a self, user: &str) -> Vec<(&'a str, f64)> {
        self.related("Friend", user)
    }

    /// The spouse with the highest confidence, first by name on ties.
    pub fn spouse<'a>(&'a self, user: &str) -> Option<(&'a str, f64)> {
        self.related("Spouse", user)
            .into_iter()
            .fold(None, |best, (s, v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((s, v)),
            })
    }

    /// Copies users, labelled entities and evidence constants into `kb`.
    pub fn populate(&self, kb: &mut KnowledgeBase) -> Result<()> {
        for u in &self.users {
            kb.add_constant(USER_SORT, u);
        }
        for (e, c) in &self.entities {
            kb.add_constant(ENTITY_SORT, e);
            kb.set_category(e, c);
        }
        kb.absorb_evidence(&self.evidence)
    }

    /// Reads evidence (`Atom value` lines), category labels and optional
    /// follow edges.
    pub fn from_texts(
        categories: CategorySet,
        evidence: &str,
        category_file: &str,
        follows: Option<&str>,
    ) -> Result<Self> {
        let mut g = SocialGraph::new(categories);
        for (e, c) in crate::logic::parse_category_file(category_file)? {
            g.add_entity(&e, &c)?;
        }
        for (a, v) in crate::logic::parse_evidence(evidence)? {
            g.set(a, v)?;
        }
        if let Some(text) = follows {
            for e in parse_follow_edges(text)? {
                g.add_follow(e);
            }
        }
        Ok(g)
    }

    pub fn evidence_to_string(&self) -> String {
        let mut out = String::new();
        for (a, v) in &self.evidence {
            let _ = writeln!(out, "{a} {v}");
        }
        out
    }

    pub fn categories_to_string(&self) -> String {
        let mut out = String::new();
        for (e, c) in &self.entities {
            let _ = writeln!(out, "{e}\t{c}");
        }
        out
    }

    pub fn follows_to_string(&self) -> String {
        let mut out = String::new();
        for f in &self.follows {
            let _ = writeln!(out, "{}\t{}\t{}", f.follower, f.followee, f.followee_followers);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn follow_edges_parse() {
        let e = parse_follow_edges("a\tb\t10\n# c\n\nb\ta\t5\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[1].followee_followers, 5);
        assert!(parse_follow_edges("a b 1").is_err());
        assert!(parse_follow_edges("a\tb\tx").is_err());
    }

    #[test]
    fn prefix_range_is_exact() {
        let mut g = SocialGraph::new(CategorySet::default());
        g.set(GroundAtom::of("Friend", &["u1", "u2"]), 1.0).unwrap();
        g.set(GroundAtom::of("Friend", &["u10", "u3"]), 1.0).unwrap();
        g.set(GroundAtom::of("Friend", &["u1", "u4"]), 0.0).unwrap();
        assert_eq!(g.friends("u1"), vec![("u2", 1.0)]);
        assert_eq!(g.friends("u10"), vec![("u3", 1.0)]);
        assert_eq!(g.num_users(), 5);
    }

    #[test]
    fn set_checks_predicate_and_range() {
        let mut g = SocialGraph::new(CategorySet::default());
        assert!(g.set(GroundAtom::of("Nope", &["a"]), 1.0).is_err());
        assert!(g.set(GroundAtom::of("Male", &["a"]), 1.5).is_err());
        assert!(g.set(GroundAtom::of("Male", &["a", "b"]), 1.0).is_err());
        assert!(g.add_entity("x", "nonsense").is_err());
    }
}
