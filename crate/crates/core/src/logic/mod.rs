//! Typed first-order vocabulary: predicate schemas, constants, literals,
//! weighted rules and the knowledge base that owns them.

mod ground;
mod parse;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexSet;

use crate::error::{Error, Result};

pub use ground::{
    ground, ground_with, AtomId, GroundAtom, GroundLiteral, GroundRule, GroundedProgram,
    GroundingOptions, ProgramBuilder,
};
pub use parse::{
    parse_atom, parse_category_file, parse_evidence, parse_rule_file, parse_schema_file,
    read_text, EvidenceMap,
};

/// Sort whose constants carry category labels for the cut-off.
pub const ENTITY_SORT: &str = "Entity";
/// Sort of social-network accounts.
pub const USER_SORT: &str = "User";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Evidence,
    Query,
    Latent,
}

impl Role {
    /// Evidence predicates are closed-world: unlisted atoms are false.
    pub fn is_closed_world(self) -> bool {
        self == Role::Evidence
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Evidence => "evidence",
            Role::Query => "query",
            Role::Latent => "latent",
        })
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "evidence" => Ok(Role::Evidence),
            "query" => Ok(Role::Query),
            "latent" => Ok(Role::Latent),
            other => Err(Error::Data(format!("unknown role `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateSchema {
    pub name: String,
    pub arg_types: Vec<String>,
    pub role: Role,
    /// Drop groundings that put the same constant in two argument slots.
    pub irreflexive: bool,
    /// Atoms of this predicate take part in the entity-category cut-off.
    pub category_scoped: bool,
}

impl PredicateSchema {
    pub fn new(name: impl Into<String>, arg_types: &[&str], role: Role) -> Self {
        PredicateSchema {
            name: name.into(),
            arg_types: arg_types.iter().map(|s| s.to_string()).collect(),
            role,
            irreflexive: false,
            category_scoped: false,
        }
    }

    pub fn irreflexive(mut self) -> Self {
        self.irreflexive = true;
        self
    }

    pub fn category_scoped(mut self) -> Self {
        self.category_scoped = true;
        self
    }

    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }
}

impl fmt::Display for PredicateSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "predicate {}({}) role={}",
            self.name,
            self.arg_types.join(","),
            self.role
        )?;
        if self.irreflexive {
            f.write_str(" irreflexive")?;
        }
        if self.category_scoped {
            f.write_str(" category_scoped")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "@{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub predicate: String,
    pub args: Vec<Term>,
    pub negated: bool,
}

impl Literal {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Literal {
            predicate: predicate.into(),
            args,
            negated: false,
        }
    }

    pub fn negate(mut self) -> Self {
        self.negated = !self.negated;
        self
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("!")?;
        }
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    Soft(f64),
    Hard,
}

impl Weight {
    pub fn is_hard(self) -> bool {
        matches!(self, Weight::Hard)
    }

    /// The finite weight, or `None` for hard rules.
    pub fn value(self) -> Option<f64> {
        match self {
            Weight::Soft(w) => Some(w),
            Weight::Hard => None,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Soft(w) => write!(f, "{w}"),
            Weight::Hard => f.write_str("HARD"),
        }
    }
}

/// A weighted implication `body => head`. An empty body is a unit clause.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub weight: Weight,
    /// Variables declared with `forall`; they may appear only in the head.
    pub quantified: Vec<String>,
    pub body: Vec<Literal>,
    pub head: Literal,
    /// Explicit override of the distinct-variables default.
    pub distinct_vars: Option<bool>,
}

impl Rule {
    pub fn new(weight: Weight, body: Vec<Literal>, head: Literal) -> Self {
        Rule {
            weight,
            quantified: Vec::new(),
            body,
            head,
            distinct_vars: None,
        }
    }

    /// Variables in first-occurrence order (quantifier list, body, head).
    pub fn variables(&self) -> Vec<String> {
        let mut seen = IndexSet::new();
        for q in &self.quantified {
            seen.insert(q.clone());
        }
        for lit in self.body.iter().chain(std::iter::once(&self.head)) {
            for v in lit.vars() {
                seen.insert(v.to_string());
            }
        }
        seen.into_iter().collect()
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.body.iter().chain(std::iter::once(&self.head))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.weight)?;
        if !self.quantified.is_empty() {
            write!(f, "forall {} . ", self.quantified.join(", "))?;
        }
        if !self.body.is_empty() {
            for (i, lit) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(" & ")?;
                }
                write!(f, "{lit}")?;
            }
            f.write_str(" => ")?;
        }
        write!(f, "{}", self.head)?;
        match self.distinct_vars {
            Some(true) => f.write_str(" [distinct]"),
            Some(false) => f.write_str(" [overlap]"),
            None => Ok(()),
        }
    }
}

pub type RuleId = usize;

/// Predicate schemas, typed constants, weighted rules and the entity
/// category labels used by the grounding cut-off.
#[derive(Clone, Debug, Default)]
pub struct KnowledgeBase {
    schemas: Vec<PredicateSchema>,
    schema_index: HashMap<String, usize>,
    constants: BTreeMap<String, IndexSet<String>>,
    rules: Vec<Rule>,
    categories: BTreeMap<String, String>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, schema: PredicateSchema) -> Result<()> {
        if schema.arity() == 0 {
            return Err(Error::Type(format!(
                "predicate `{}` must have at least one argument",
                schema.name
            )));
        }
        if self.schema_index.contains_key(&schema.name) {
            return Err(Error::Duplicate(format!("predicate `{}`", schema.name)));
        }
        for sort in &schema.arg_types {
            self.constants.entry(sort.clone()).or_default();
        }
        self.schema_index
            .insert(schema.name.clone(), self.schemas.len());
        self.schemas.push(schema);
        Ok(())
    }

    pub fn schema(&self, name: &str) -> Option<&PredicateSchema> {
        self.schema_index.get(name).map(|&i| &self.schemas[i])
    }

    pub fn schemas(&self) -> &[PredicateSchema] {
        &self.schemas
    }

    pub fn set_role(&mut self, predicate: &str, role: Role) -> Result<()> {
        let idx = *self
            .schema_index
            .get(predicate)
            .ok_or_else(|| Error::UnknownPredicate(predicate.to_string()))?;
        self.schemas[idx].role = role;
        Ok(())
    }

    pub fn add_constant(&mut self, sort: &str, symbol: &str) {
        self.constants
            .entry(sort.to_string())
            .or_default()
            .insert(symbol.to_string());
    }

    pub fn constants(&self, sort: &str) -> Vec<&str> {
        self.constants
            .get(sort)
            .map(|s| s.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn has_constant(&self, sort: &str, symbol: &str) -> bool {
        self.constants
            .get(sort)
            .is_some_and(|s| s.contains(symbol))
    }

    pub fn sorts(&self) -> impl Iterator<Item = &str> {
        self.constants.keys().map(String::as_str)
    }

    pub fn set_category(&mut self, entity: &str, category: &str) {
        self.add_constant(ENTITY_SORT, entity);
        self.categories
            .insert(entity.to_string(), category.to_string());
    }

    pub fn category_of(&self, entity: &str) -> Option<&str> {
        self.categories.get(entity).map(String::as_str)
    }

    pub fn categories(&self) -> &BTreeMap<String, String> {
        &self.categories
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: RuleId) -> Result<&Rule> {
        self.rules.get(id).ok_or(Error::UnknownRule(id))
    }

    pub fn weights(&self) -> Vec<Weight> {
        self.rules.iter().map(|r| r.weight).collect()
    }

    pub fn set_weight(&mut self, id: RuleId, weight: Weight) -> Result<()> {
        let rule = self.rules.get_mut(id).ok_or(Error::UnknownRule(id))?;
        rule.weight = weight;
        Ok(())
    }

    pub fn set_weights(&mut self, weights: &[Weight]) -> Result<()> {
        if weights.len() != self.rules.len() {
            return Err(Error::Data(format!(
                "expected {} weights, got {}",
                self.rules.len(),
                weights.len()
            )));
        }
        for (rule, &w) in self.rules.iter_mut().zip(weights) {
            rule.weight = w;
        }
        Ok(())
    }

    /// Parses a rule against this knowledge base without adding it.
    pub fn parse_rule(&self, text: &str) -> Result<Rule> {
        let rule = parse::parse_rule(text)?;
        self.check_rule(&rule)?;
        Ok(rule)
    }

    /// Type-checks and appends a rule; constants it mentions join their sorts.
    pub fn add_rule(&mut self, rule: Rule) -> Result<RuleId> {
        self.check_rule(&rule)?;
        let mut typed = Vec::new();
        for lit in rule.literals() {
            let schema = &self.schemas[self.schema_index[&lit.predicate]];
            for (arg, sort) in lit.args.iter().zip(&schema.arg_types) {
                if let Term::Const(c) = arg {
                    typed.push((sort.clone(), c.clone()));
                }
            }
        }
        for (sort, c) in typed {
            self.add_constant(&sort, &c);
        }
        self.rules.push(rule);
        Ok(self.rules.len() - 1)
    }

    pub fn add_rule_text(&mut self, text: &str) -> Result<RuleId> {
        let rule = parse::parse_rule(text)?;
        self.add_rule(rule)
    }

    /// Checks predicates, arity, variable sorts and head binding. Returns the
    /// sort of every variable.
    pub fn check_rule(&self, rule: &Rule) -> Result<BTreeMap<String, String>> {
        let mut sorts: BTreeMap<String, String> = BTreeMap::new();
        for lit in rule.literals() {
            let schema = self
                .schema(&lit.predicate)
                .ok_or_else(|| Error::UnknownPredicate(lit.predicate.clone()))?;
            if schema.arity() != lit.args.len() {
                return Err(Error::Arity {
                    predicate: lit.predicate.clone(),
                    expected: schema.arity(),
                    found: lit.args.len(),
                });
            }
            for (arg, sort) in lit.args.iter().zip(&schema.arg_types) {
                if let Term::Var(v) = arg {
                    match sorts.get(v) {
                        Some(prev) if prev != sort => {
                            return Err(Error::Type(format!(
                                "variable `{v}` used as both `{prev}` and `{sort}`"
                            )))
                        }
                        Some(_) => {}
                        None => {
                            sorts.insert(v.clone(), sort.clone());
                        }
                    }
                }
            }
        }
        if !rule.body.is_empty() {
            for v in rule.head.vars() {
                let bound = rule.body.iter().any(|l| l.vars().any(|b| b == v))
                    || rule.quantified.iter().any(|q| q == v);
                if !bound {
                    return Err(Error::Type(format!("unbound head variable `{v}`")));
                }
            }
        }
        for q in &rule.quantified {
            if !sorts.contains_key(q) {
                return Err(Error::Type(format!(
                    "quantified variable `{q}` does not occur in the rule"
                )));
            }
        }
        Ok(sorts)
    }

    /// Effective distinct-variables flag: the explicit override, else true
    /// when the body has a literal with two arguments of one sort (a
    /// user-user relation such as Friend or Spouse).
    pub fn distinct_vars(&self, rule: &Rule) -> bool {
        if let Some(flag) = rule.distinct_vars {
            return flag;
        }
        rule.body.iter().any(|lit| {
            self.schema(&lit.predicate).is_some_and(|s| {
                s.arg_types.len() >= 2
                    && s.arg_types
                        .iter()
                        .enumerate()
                        .any(|(i, a)| s.arg_types[i + 1..].contains(a))
            })
        })
    }

    /// Rule file rendering: one rule per line, usable by [`parse_rule_file`].
    pub fn rules_to_string(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub fn schema_to_string(&self) -> String {
        let mut out = String::new();
        for s in &self.schemas {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }

    /// Rebinds symbols appearing in evidence into their declared sorts.
    pub fn absorb_evidence(&mut self, evidence: &EvidenceMap) -> Result<()> {
        for atom in evidence.keys() {
            let schema = self
                .schema(&atom.predicate)
                .ok_or_else(|| Error::UnknownPredicate(atom.predicate.clone()))?
                .clone();
            if schema.arity() != atom.args.len() {
                return Err(Error::Arity {
                    predicate: atom.predicate.clone(),
                    expected: schema.arity(),
                    found: atom.args.len(),
                });
            }
            for (c, sort) in atom.args.iter().zip(&schema.arg_types) {
                self.add_constant(sort, c);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kb() -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        kb.declare(PredicateSchema::new("Friend", &["User", "User"], Role::Evidence))
            .unwrap();
        kb.declare(PredicateSchema::new("Like", &["User", "Entity"], Role::Latent))
            .unwrap();
        kb.declare(PredicateSchema::new("Male", &["User"], Role::Evidence))
            .unwrap();
        kb
    }

    #[test]
    fn duplicate_predicate_rejected() {
        let mut kb = kb();
        let err = kb
            .declare(PredicateSchema::new("Friend", &["User", "User"], Role::Query))
            .unwrap_err();
        assert!(matches!(err, Error::Duplicate(_)));
    }

    #[test]
    fn zero_arity_rejected() {
        let mut kb = kb();
        assert!(kb
            .declare(PredicateSchema::new("Nothing", &[], Role::Query))
            .is_err());
    }

    #[test]
    fn distinct_default_follows_binary_relations() {
        let kb = kb();
        let r = kb.parse_rule("1: Friend(a,b) & Like(a,e) => Like(b,e)").unwrap();
        assert!(kb.distinct_vars(&r));
        let r = kb.parse_rule("1: Male(u) => Like(u,@x)").unwrap();
        assert!(!kb.distinct_vars(&r));
        let r = kb.parse_rule("1: Friend(a,b) => Like(b,@x) [overlap]").unwrap();
        assert!(!kb.distinct_vars(&r));
    }

    #[test]
    fn sort_clash_is_a_type_error() {
        let kb = kb();
        let err = kb.parse_rule("1: Like(u,e) => Friend(u,e)").unwrap_err();
        assert!(matches!(err, Error::Type(_)));
    }

    #[test]
    fn rule_constants_join_sorts() {
        let mut kb = kb();
        kb.add_rule_text("1: Male(u) => Like(u,@bears)").unwrap();
        assert!(kb.has_constant("Entity", "bears"));
    }
}
