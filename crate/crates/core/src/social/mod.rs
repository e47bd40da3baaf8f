//! Social-network predicate vocabulary, category labels and rule templates.

mod graph;

use crate::error::{Error, Result};
use crate::logic::{KnowledgeBase, Literal, PredicateSchema, Role, Rule, Term, Weight, ENTITY_SORT, USER_SORT};

pub use graph::{parse_follow_edges, FollowEdge, SocialGraph};

pub const STATE_SORT: &str = "State";

pub const DEFAULT_CATEGORIES: [&str; 12] = [
    "food",
    "sports",
    "tv-movies",
    "politics",
    "electronics",
    "music",
    "travel",
    "books",
    "fashion",
    "finance",
    "pets",
    "other",
];

/// Predicates declared by [`default_schema`], in declaration order.
pub const DEFAULT_PREDICATES: [&str; 12] = [
    "LiveIn",
    "Male",
    "Female",
    "WorkIn",
    "StudyAt",
    "Friend",
    "Spouse",
    "LiveInSamePlace",
    "Like",
    "Dislike",
    "MentionPos",
    "MentionNeg",
];

/// User-user relations that carry paired symmetry rules.
pub const SYMMETRIC_PREDICATES: [&str; 3] = ["Friend", "Spouse", "LiveInSamePlace"];

/// Ordered, duplicate-free list of entity category labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CategorySet {
    labels: Vec<String>,
}

impl CategorySet {
    pub fn new<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Config("category set is empty".into()));
        }
        let mut out: Vec<String> = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref().trim();
            if l.is_empty() || !l.chars().all(|c| c.is_alphanumeric() || c == '-' || c == '_') {
                return Err(Error::Config(format!("bad category label `{l}`")));
            }
            if out.iter().any(|x| x == l) {
                return Err(Error::Duplicate(format!("category `{l}`")));
            }
            out.push(l.to_string());
        }
        Ok(CategorySet { labels: out })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }
}

impl Default for CategorySet {
    fn default() -> Self {
        CategorySet::new(&DEFAULT_CATEGORIES).expect("default labels are valid")
    }
}

/// Name of the unary category-level preference predicate.
pub fn like_cat(category: &str) -> String {
    format!("LikeCat_{category}")
}

/// Inverse of [`like_cat`].
pub fn category_of_like_cat(predicate: &str) -> Option<&str> {
    predicate.strip_prefix("LikeCat_")
}

/// Knowledge base with the social predicates declared and the symmetry and
/// gender-exclusion hard rules installed. Roles default to: locations and
/// derived relations are queries, preferences latent, everything else
/// evidence.
pub fn default_schema() -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    let u = USER_SORT;
    let e = ENTITY_SORT;
    let decls = [
        PredicateSchema::new("LiveIn", &[u, STATE_SORT], Role::Query),
        PredicateSchema::new("Male", &[u], Role::Evidence),
        PredicateSchema::new("Female", &[u], Role::Evidence),
        PredicateSchema::new("WorkIn", &[u, e], Role::Evidence),
        PredicateSchema::new("StudyAt", &[u, e], Role::Evidence),
        PredicateSchema::new("Friend", &[u, u], Role::Evidence).irreflexive(),
        PredicateSchema::new("Spouse", &[u, u], Role::Evidence).irreflexive(),
        PredicateSchema::new("LiveInSamePlace", &[u, u], Role::Query).irreflexive(),
        PredicateSchema::new("Like", &[u, e], Role::Latent).category_scoped(),
        PredicateSchema::new("Dislike", &[u, e], Role::Latent).category_scoped(),
        PredicateSchema::new("MentionPos", &[u, e], Role::Evidence).category_scoped(),
        PredicateSchema::new("MentionNeg", &[u, e], Role::Evidence).category_scoped(),
    ];
    for d in decls {
        kb.declare(d).expect("fresh knowledge base");
    }
    for p in SYMMETRIC_PREDICATES {
        kb.add_rule_text(&format!("HARD: {p}(a,b) => {p}(b,a)"))
            .expect("symmetry rule type-checks");
    }
    kb.add_rule_text("HARD: Male(u) => !Female(u)")
        .expect("gender rule type-checks");
    kb
}

/// Declares `LikeCat_<c>(User)` for every category not yet declared.
pub fn declare_category_predicates(kb: &mut KnowledgeBase, categories: &CategorySet, role: Role) -> Result<()> {
    for c in categories.labels() {
        let name = like_cat(c);
        if kb.schema(&name).is_none() {
            kb.declare(PredicateSchema::new(name, &[USER_SORT], role))?;
        }
    }
    Ok(())
}

/// Rule templates grouped by kind. Soft rules start at weight 0.
#[derive(Clone, Debug, Default)]
pub struct TemplateSet {
    /// Friend and spouse homophily, two per category.
    pub homophily: Vec<Rule>,
    /// Transitivity, couples-are-friends and same-place rules.
    pub relational: Vec<Rule>,
    /// Gender to category-preference rules, two per category.
    pub attribute: Vec<Rule>,
    /// Hard `Like(u,@e) => LikeCat_c(u)`, one per labelled entity.
    pub projection: Vec<Rule>,
}

impl TemplateSet {
    pub fn all(&self) -> impl Iterator<Item = &Rule> {
        self.homophily
            .iter()
            .chain(&self.relational)
            .chain(&self.attribute)
            .chain(&self.projection)
    }

    pub fn len(&self) -> usize {
        self.homophily.len() + self.relational.len() + self.attribute.len() + self.projection.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn var(v: &str) -> Term {
    Term::Var(v.to_string())
}

fn lit(p: &str, args: &[&str]) -> Literal {
    Literal::new(p, args.iter().map(|a| var(a)).collect())
}

/// Instantiates the template families over `categories`, declaring the
/// `LikeCat_<c>` predicates as queries when missing. The rules are checked
/// against `kb` but not added to it.
pub fn instantiate_templates(kb: &mut KnowledgeBase, categories: &CategorySet) -> Result<TemplateSet> {
    for (entity, cat) in kb.categories() {
        if !categories.contains(cat) {
            return Err(Error::Data(format!(
                "entity `{entity}` has unknown category `{cat}`"
            )));
        }
    }
    declare_category_predicates(kb, categories, Role::Query)?;
    let zero = Weight::Soft(0.0);
    let mut t = TemplateSet::default();
    for c in categories.labels() {
        let lc = like_cat(c);
        for rel in ["Friend", "Spouse"] {
            t.homophily.push(Rule::new(
                zero,
                vec![lit(rel, &["a", "b"]), lit(&lc, &["a"])],
                lit(&lc, &["b"]),
            ));
        }
        for g in ["Male", "Female"] {
            t.attribute
                .push(Rule::new(zero, vec![lit(g, &["u"])], lit(&lc, &["u"])));
        }
    }
    t.relational = vec![
        Rule::new(zero, vec![lit("Friend", &["a", "b"]), lit("Friend", &["b", "c"])], lit("Friend", &["a", "c"])),
        Rule::new(zero, vec![lit("Spouse", &["a", "b"]), lit("Friend", &["b", "c"])], lit("Friend", &["a", "c"])),
        Rule::new(zero, vec![lit("Spouse", &["a", "b"])], lit("Friend", &["a", "b"])),
        Rule::new(zero, vec![lit("Friend", &["a", "b"])], lit("LiveInSamePlace", &["a", "b"])),
        Rule::new(zero, vec![lit("Spouse", &["a", "b"])], lit("LiveInSamePlace", &["a", "b"])),
    ];
    for (entity, cat) in kb.categories() {
        t.projection.push(Rule::new(
            Weight::Hard,
            vec![Literal::new("Like", vec![var("u"), Term::Const(entity.clone())])],
            lit(&like_cat(cat), &["u"]),
        ));
    }
    for r in t.all() {
        kb.check_rule(r)?;
    }
    Ok(t)
}

/// `0: <predicate>(u,@<constant>) => LikeCat_<category>(u)`, e.g. working at
/// an IT company implying a taste for electronics.
pub fn attribute_rule(
    kb: &KnowledgeBase,
    categories: &CategorySet,
    predicate: &str,
    constant: &str,
    category: &str,
) -> Result<Rule> {
    if !categories.contains(category) {
        return Err(Error::Data(format!("unknown category `{category}`")));
    }
    let rule = Rule::new(
        Weight::Soft(0.0),
        vec![Literal::new(predicate, vec![var("u"), Term::Const(constant.to_string())])],
        lit(&like_cat(category), &["u"]),
    );
    kb.check_rule(&rule)?;
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn category_set_validation() {
        assert!(CategorySet::new::<&str>(&[]).is_err());
        assert!(CategorySet::new(&["a", "a"]).is_err());
        assert!(CategorySet::new(&["a b"]).is_err());
        assert_eq!(CategorySet::default().len(), 12);
        assert_eq!(CategorySet::default().index_of("pets"), Some(10));
    }

    #[test]
    fn like_cat_round_trip() {
        assert_eq!(category_of_like_cat(&like_cat("tv-movies")), Some("tv-movies"));
        assert_eq!(category_of_like_cat("Like"), None);
    }
}
