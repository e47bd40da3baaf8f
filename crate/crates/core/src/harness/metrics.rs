use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Binary confusion counts. Every ratio with a zero denominator is 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl Confusion {
    pub fn add(&mut self, predicted: bool, gold: bool) {
        match (predicted, gold) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut c = Confusion::default();
        for (p, g) in pairs {
            c.add(p, g);
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }
}

/// Scores of one predictor on one target set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Metrics {
    Binary(Confusion),
    /// Single-label multi-class: correct predictions out of total.
    Multi { correct: usize, total: usize },
}

impl Metrics {
    pub fn accuracy(&self) -> f64 {
        match self {
            Metrics::Binary(c) => c.accuracy(),
            Metrics::Multi { correct, total } => ratio(*correct, *total),
        }
    }

    /// F1 for binary tasks; accuracy (micro-F1) for multi-class ones.
    pub fn f1(&self) -> f64 {
        match self {
            Metrics::Binary(c) => c.f1(),
            Metrics::Multi { .. } => self.accuracy(),
        }
    }
}

/// Run metadata, per-predictor metrics and rule ratios, emitted as
/// `key<TAB>value` lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub meta: Vec<(String, String)>,
    pub results: Vec<(String, Metrics)>,
    pub rule_ratios: Vec<(String, f64)>,
}

impl EvalReport {
    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.meta.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.meta.push((key.to_string(), value)),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, name: &str, m: Metrics) {
        self.results.push((name.to_string(), m));
    }

    pub fn get(&self, name: &str) -> Option<&Metrics> {
        self.results.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    /// Appends another report's results under `prefix.`.
    pub fn absorb(&mut self, prefix: &str, other: &EvalReport) {
        for (n, m) in &other.results {
            self.results.push((format!("{prefix}.{n}"), *m));
        }
        for (n, r) in &other.rule_ratios {
            self.rule_ratios.push((format!("{prefix}.{n}"), *r));
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "{k}\t{v}");
        }
        for (name, m) in &self.results {
            match m {
                Metrics::Binary(c) => {
                    let _ = writeln!(out, "{name}.tp\t{}", c.tp);
                    let _ = writeln!(out, "{name}.fp\t{}", c.fp);
                    let _ = writeln!(out, "{name}.fn\t{}", c.fn_);
                    let _ = writeln!(out, "{name}.tn\t{}", c.tn);
                    let _ = writeln!(out, "{name}.precision\t{}", c.precision());
                    let _ = writeln!(out, "{name}.recall\t{}", c.recall());
                    let _ = writeln!(out, "{name}.f1\t{}", c.f1());
                    let _ = writeln!(out, "{name}.accuracy\t{}", c.accuracy());
                }
                Metrics::Multi { correct, total } => {
                    let _ = writeln!(out, "{name}.correct\t{correct}");
                    let _ = writeln!(out, "{name}.total\t{total}");
                    let _ = writeln!(out, "{name}.accuracy\t{}", m.accuracy());
                }
            }
        }
        for (name, r) in &self.rule_ratios {
            let _ = writeln!(out, "ratio\t{name}\t{r}");
        }
        out
    }

    /// Parses [`to_tsv`](Self::to_tsv) output back into `(key, value)`
    /// pairs; rule ratios come back as `ratio.<rule>` keys.
    pub fn parse_tsv(text: &str) -> Result<Vec<(String, String)>> {
        text.lines()
            .filter(|l| !l.is_empty())
            .enumerate()
            .map(|(i, l)| {
                let mut parts = l.splitn(3, '\t');
                match (parts.next(), parts.next(), parts.next()) {
                    (Some("ratio"), Some(rule), Some(v)) => Ok((format!("ratio.{rule}"), v.to_string())),
                    (Some(k), Some(v), None) => Ok((k.to_string(), v.to_string())),
                    _ => Err(Error::parse(i + 1, 1, "expected key<TAB>value")),
                }
            })
            .collect()
    }
}
