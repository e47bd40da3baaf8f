//! Line-oriented text formats: rules, schemas, evidence and category labels.
//!
//! Rule syntax: `<weight|HARD>: [forall v, w .] Lit & Lit ... => Lit [flag]`
//! where `!` negates a literal, lowercase identifiers are variables, `@sym`
//! denotes a constant and the optional flag is `[distinct]` or `[overlap]`.
//! A rule without `=>` is a unit clause. `#` starts a comment everywhere.

use std::collections::BTreeMap;
use std::path::Path;

use super::{GroundAtom, KnowledgeBase, Literal, PredicateSchema, Role, Rule, Term, Weight};
use crate::error::{Error, Result};

/// Evidence as read from disk: atom to truth value in [0, 1].
pub type EvidenceMap = BTreeMap<GroundAtom, f64>;

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Const(String),
    LParen,
    RParen,
    Comma,
    Amp,
    Arrow,
    Bang,
    Dot,
    LBracket,
    RBracket,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Const(s) => format!("`@{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Arrow => "`=>`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Dot => "`.`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

/// Tokens paired with their 1-based column.
fn lex(text: &str, col_offset: usize) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col_offset + i + 1;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => out.push((Tok::LParen, col)),
            ')' => out.push((Tok::RParen, col)),
            ',' => out.push((Tok::Comma, col)),
            '&' | '^' | '∧' => out.push((Tok::Amp, col)),
            '!' | '¬' => out.push((Tok::Bang, col)),
            '.' => out.push((Tok::Dot, col)),
            '[' => out.push((Tok::LBracket, col)),
            ']' => out.push((Tok::RBracket, col)),
            '⇒' => out.push((Tok::Arrow, col)),
            '=' => {
                if chars.get(i + 1) == Some(&'>') {
                    out.push((Tok::Arrow, col));
                    i += 2;
                    continue;
                }
                return Err(Error::parse(1, col, "expected `=>`"));
            }
            '@' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                if j == start {
                    return Err(Error::parse(1, col, "empty constant after `@`"));
                }
                out.push((Tok::Const(chars[start..j].iter().collect()), col));
                i = j;
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                out.push((Tok::Ident(chars[i..j].iter().collect()), col));
                i = j;
                continue;
            }
            other => {
                return Err(Error::parse(1, col, format!("unexpected character `{other}`")))
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or(self.end_col)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(1, self.col(), msg)
    }

    fn unexpected(&self, expected: &str) -> Error {
        match self.peek() {
            Some(t) => self.err(format!("expected {expected}, found {}", t.describe())),
            None => self.err(format!("expected {expected}, found end of input")),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self, expected: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected(expected)),
        }
    }

    fn literal(&mut self) -> Result<Literal> {
        let mut negated = false;
        while self.eat(&Tok::Bang) {
            negated = !negated;
        }
        let name = self.ident("a predicate name")?;
        if !name.starts_with(|c: char| c.is_uppercase()) {
            return Err(Error::parse(
                1,
                self.toks[self.pos - 1].1,
                format!("predicate names start with an uppercase letter: `{name}`"),
            ));
        }
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Const(c)) => {
                    args.push(Term::Const(c.clone()));
                    self.pos += 1;
                }
                Some(Tok::Ident(v)) if v.starts_with(|c: char| c.is_lowercase()) => {
                    args.push(Term::Var(v.clone()));
                    self.pos += 1;
                }
                _ => return Err(self.unexpected("a variable or `@constant`")),
            }
            if self.eat(&Tok::Comma) {
                continue;
            }
            if self.eat(&Tok::RParen) {
                break;
            }
            return Err(self.unexpected("`,` or `)`"));
        }
        Ok(Literal {
            predicate: name,
            args,
            negated,
        })
    }
}

/// Parses one rule. Column numbers in errors count from the start of `text`.
pub(crate) fn parse_rule(text: &str) -> Result<Rule> {
    let text = strip_comment(text);
    let colon = text
        .find(':')
        .ok_or_else(|| Error::parse(1, 1, "missing `<weight>:` prefix"))?;
    let weight_text = text[..colon].trim();
    let weight = if weight_text == "HARD" {
        Weight::Hard
    } else {
        match weight_text.parse::<f64>() {
            Ok(w) if w.is_finite() => Weight::Soft(w),
            _ => {
                let lead = text[..colon].len() - text[..colon].trim_start().len();
                return Err(Error::parse(
                    1,
                    text[..lead].chars().count() + 1,
                    format!("malformed weight `{weight_text}`"),
                ));
            }
        }
    };
    let rest = &text[colon + 1..];
    let offset = text[..colon + 1].chars().count();
    let toks = lex(rest, offset)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_col: offset + rest.chars().count() + 1,
    };

    let mut quantified = Vec::new();
    if p.peek() == Some(&Tok::Ident("forall".into())) {
        p.pos += 1;
        loop {
            let v = p.ident("a variable")?;
            quantified.push(v);
            if p.eat(&Tok::Comma) {
                continue;
            }
            p.expect(Tok::Dot)?;
            break;
        }
    }

    let mut lits = vec![p.literal()?];
    while p.eat(&Tok::Amp) {
        lits.push(p.literal()?);
    }
    let (body, head) = if p.eat(&Tok::Arrow) {
        (lits, p.literal()?)
    } else if lits.len() == 1 {
        (Vec::new(), lits.pop().unwrap())
    } else {
        return Err(p.unexpected("`=>`"));
    };

    let mut distinct_vars = None;
    if p.eat(&Tok::LBracket) {
        let flag = p.ident("`distinct` or `overlap`")?;
        distinct_vars = match flag.as_str() {
            "distinct" => Some(true),
            "overlap" => Some(false),
            _ => {
                p.pos -= 1;
                return Err(p.unexpected("`distinct` or `overlap`"));
            }
        };
        p.expect(Tok::RBracket)?;
    }
    if p.peek().is_some() {
        return Err(p.unexpected("end of rule"));
    }
    Ok(Rule {
        weight,
        quantified,
        body,
        head,
        distinct_vars,
    })
}

/// Reads a rule file into `kb`. Lines starting with `predicate` or `const`
/// are schema declarations and may be mixed with rules.
pub fn parse_rule_file(text: &str, kb: &mut KnowledgeBase) -> Result<()> {
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let res = if line.starts_with("predicate ") || line.starts_with("const ") {
            schema_line(line, kb)
        } else {
            parse_rule(line).and_then(|r| kb.add_rule(r).map(|_| ()))
        };
        res.map_err(|e| e.at_line(lineno + 1))?;
    }
    Ok(())
}

/// Schema file: `predicate Name(Sort,...) role=query [irreflexive] [category_scoped]`
/// and `const Sort sym sym ...` lines.
pub fn parse_schema_file(text: &str, kb: &mut KnowledgeBase) -> Result<()> {
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        schema_line(line, kb).map_err(|e| e.at_line(lineno + 1))?;
    }
    Ok(())
}

fn schema_line(line: &str, kb: &mut KnowledgeBase) -> Result<()> {
    if let Some(rest) = line.strip_prefix("const ") {
        let mut parts = rest.split_whitespace();
        let sort = parts
            .next()
            .ok_or_else(|| Error::parse(1, 7, "missing sort name"))?;
        for sym in parts {
            kb.add_constant(sort, sym.trim_start_matches('@'));
        }
        return Ok(());
    }
    let rest = line
        .strip_prefix("predicate ")
        .ok_or_else(|| Error::parse(1, 1, "expected `predicate` or `const`"))?;
    let open = rest
        .find('(')
        .ok_or_else(|| Error::parse(1, 11, "expected `(` after predicate name"))?;
    let close = rest
        .find(')')
        .ok_or_else(|| Error::parse(1, 11 + open, "missing `)`"))?;
    let name = rest[..open].trim();
    if name.is_empty() || !name.starts_with(|c: char| c.is_uppercase()) {
        return Err(Error::parse(1, 11, format!("bad predicate name `{name}`")));
    }
    let sorts: Vec<&str> = rest[open + 1..close]
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    let mut schema = PredicateSchema::new(name, &sorts, Role::Evidence);
    let mut saw_role = false;
    for opt in rest[close + 1..].split_whitespace() {
        let opt = opt.trim_matches(|c| c == '[' || c == ']');
        if let Some(role) = opt.strip_prefix("role=") {
            schema.role = role.parse()?;
            saw_role = true;
        } else if opt == "irreflexive" {
            schema.irreflexive = true;
        } else if opt == "category_scoped" {
            schema.category_scoped = true;
        } else {
            return Err(Error::parse(1, 1, format!("unknown predicate option `{opt}`")));
        }
    }
    if !saw_role {
        return Err(Error::parse(1, 1, format!("predicate `{name}` needs role=...")));
    }
    kb.declare(schema)
}

/// Parses a ground atom `Pred(a,b)`; constants may be bare or `@`-prefixed.
pub fn parse_atom(text: &str) -> Result<GroundAtom> {
    let text = text.trim();
    let open = text
        .find('(')
        .ok_or_else(|| Error::parse(1, 1, format!("expected `Pred(args)`, got `{text}`")))?;
    if !text.ends_with(')') {
        return Err(Error::parse(1, text.chars().count(), "missing `)`"));
    }
    let name = text[..open].trim();
    if name.is_empty() {
        return Err(Error::parse(1, 1, "missing predicate name"));
    }
    let args: Vec<String> = text[open + 1..text.len() - 1]
        .split(',')
        .map(|a| a.trim().trim_start_matches('@').to_string())
        .collect();
    if args.iter().any(String::is_empty) {
        return Err(Error::parse(1, open + 2, "empty argument"));
    }
    Ok(GroundAtom::new(name, args))
}

/// Evidence file: `Atom value` lines (value defaults to 1), `!Atom` for 0.
pub fn parse_evidence(text: &str) -> Result<EvidenceMap> {
    let mut out = EvidenceMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let line_err = |e: Error| e.at_line(lineno + 1);
        let (atom_text, value) = if let Some(neg) = line.strip_prefix('!') {
            (neg.trim(), 0.0)
        } else {
            match line.rfind(')') {
                Some(close) => {
                    let tail = line[close + 1..].trim();
                    let value = if tail.is_empty() {
                        1.0
                    } else {
                        tail.parse::<f64>().map_err(|_| {
                            Error::parse(lineno + 1, close + 2, format!("bad value `{tail}`"))
                        })?
                    };
                    (&line[..=close], value)
                }
                None => return Err(Error::parse(lineno + 1, 1, "expected an atom")),
            }
        };
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfRange {
                what: format!("evidence on line {}", lineno + 1),
                value,
            });
        }
        let atom = parse_atom(atom_text).map_err(line_err)?;
        out.insert(atom, value);
    }
    Ok(out)
}

/// Category file: `entity<TAB>category` lines.
pub fn parse_category_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(entity), Some(cat), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(lineno + 1, 1, "expected `entity<TAB>category`"));
        };
        out.insert(entity.trim().to_string(), cat.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_implication() {
        let r = parse_rule("0.242: WorkInIT(u) => LikeElectronics(u)").unwrap();
        assert_eq!(r.weight, Weight::Soft(0.242));
        assert_eq!(r.body.len(), 1);
        assert_eq!(r.body[0].predicate, "WorkInIT");
        assert_eq!(r.head.predicate, "LikeElectronics");
        assert_eq!(r.head.args, vec![Term::Var("u".into())]);
    }

    #[test]
    fn hard_rule_round_trips() {
        let text = "HARD: Spouse(a,b) => Friend(a,b)";
        let r = parse_rule(text).unwrap();
        assert_eq!(r.weight, Weight::Hard);
        assert_eq!(r.to_string(), text);
        assert_eq!(parse_rule(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn malformed_literal_reports_position() {
        let err = parse_rule("0.5: Friend(a,b =>").unwrap_err();
        match err {
            Error::Parse { column, message, .. } => {
                assert_eq!(column, 17, "{message}");
                assert!(message.contains("`,` or `)`"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_weight() {
        let err = parse_rule("abc: Male(u)").unwrap_err();
        assert!(matches!(err, Error::Parse { column: 1, .. }));
    }

    #[test]
    fn negation_constants_flags_and_forall() {
        let r = parse_rule("-1.5: forall e . Friend(a,b) & !Like(a,@fish) => Like(b,e) [overlap]")
            .unwrap();
        assert_eq!(r.quantified, vec!["e"]);
        assert!(r.body[1].negated);
        assert_eq!(r.body[1].args[1], Term::Const("fish".into()));
        assert_eq!(r.distinct_vars, Some(false));
        assert_eq!(parse_rule(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn unit_clause() {
        let r = parse_rule("-0.4: LikeCat_sports(u)").unwrap();
        assert!(r.body.is_empty());
        assert_eq!(r.to_string(), "-0.4: LikeCat_sports(u)");
    }

    #[test]
    fn evidence_lines() {
        let ev = parse_evidence("Friend(u1,u2) 1\n!Male(u3)\nSpouse(u1,@u2) 0.25 # soft\n\n")
            .unwrap();
        assert_eq!(ev[&GroundAtom::new("Friend", vec!["u1".into(), "u2".into()])], 1.0);
        assert_eq!(ev[&GroundAtom::new("Male", vec!["u3".into()])], 0.0);
        assert_eq!(ev[&GroundAtom::new("Spouse", vec!["u1".into(), "u2".into()])], 0.25);
        assert!(parse_evidence("Male(u1) 1.5").is_err());
    }

    #[test]
    fn schema_lines() {
        let mut kb = KnowledgeBase::new();
        parse_schema_file(
            "predicate Friend(User,User) role=evidence irreflexive\n\
             predicate Like(User,Entity) role=latent category_scoped\n\
             const User u1 u2\n",
            &mut kb,
        )
        .unwrap();
        assert!(kb.schema("Friend").unwrap().irreflexive);
        assert!(kb.schema("Like").unwrap().category_scoped);
        assert_eq!(kb.constants("User"), vec!["u1", "u2"]);
        let err = parse_schema_file("predicate X(User)", &mut kb).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn rule_file_errors_carry_line() {
        let mut kb = KnowledgeBase::new();
        let err = parse_rule_file(
            "predicate Male(User) role=evidence\n1: Male(u)\n0.5: Male(u =>\n",
            &mut kb,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }
}
