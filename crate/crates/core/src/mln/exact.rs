//! Exact marginals and count moments by Gray-code enumeration.

use rand::Rng;

use super::compiled::Sub;
use crate::error::{Error, Result};

/// Marginals and moments of one component.
#[derive(Clone, Debug)]
pub struct CompStats {
    pub marginals: Vec<f64>,
    /// E[n] per local rule.
    pub mean: Vec<f64>,
    /// Cov[n] per local rule pair, row-major; empty when not requested.
    pub cov: Vec<f64>,
    /// log Z of the component; `None` for sampled components.
    pub log_z: Option<f64>,
}

/// Incremental state for walking the hypercube one flip at a time.
struct Walker<'a> {
    sub: &'a Sub,
    values: Vec<bool>,
    sat: Vec<u32>,
    hard_broken: usize,
    score: f64,
    counts: Vec<f64>,
}

impl<'a> Walker<'a> {
    fn new(sub: &'a Sub) -> Self {
        let values = vec![false; sub.k];
        let mut sat = Vec::with_capacity(sub.clauses.len());
        let mut hard_broken = 0;
        let mut score = 0.0;
        let mut counts = vec![0.0; sub.num_rules];
        for c in &sub.clauses {
            let s = c.lits.iter().filter(|&&(_, want)| !want).count() as u32;
            sat.push(s);
            if s > 0 {
                score += c.weight;
                counts[c.rule as usize] += 1.0;
            } else if c.hard {
                hard_broken += 1;
            }
        }
        Walker {
            sub,
            values,
            sat,
            hard_broken,
            score,
            counts,
        }
    }

    fn flip(&mut self, a: usize) {
        let v = !self.values[a];
        self.values[a] = v;
        self.score += if v { self.sub.bias[a] } else { -self.sub.bias[a] };
        for &(c, want) in &self.sub.occurs[a] {
            let c = c as usize;
            let clause = &self.sub.clauses[c];
            if v == want {
                self.sat[c] += 1;
                if self.sat[c] == 1 {
                    self.score += clause.weight;
                    self.counts[clause.rule as usize] += 1.0;
                    if clause.hard {
                        self.hard_broken -= 1;
                    }
                }
            } else {
                self.sat[c] -= 1;
                if self.sat[c] == 0 {
                    self.score -= clause.weight;
                    self.counts[clause.rule as usize] -= 1.0;
                    if clause.hard {
                        self.hard_broken += 1;
                    }
                }
            }
        }
    }

    fn feasible(&self) -> bool {
        self.hard_broken == 0
    }
}

/// Visits every assignment once, in Gray-code order.
fn walk(sub: &Sub, mut visit: impl FnMut(&Walker<'_>)) {
    let mut w = Walker::new(sub);
    visit(&w);
    let total: u64 = 1 << sub.k;
    for i in 1..total {
        w.flip(i.trailing_zeros() as usize);
        visit(&w);
    }
}

/// Two passes over all 2^k assignments: the first finds the max score, the
/// second accumulates normalized statistics.
pub fn exact_stats(sub: &Sub, want_cov: bool) -> Result<CompStats> {
    let mut max = f64::NEG_INFINITY;
    walk(sub, |w| {
        if w.feasible() && w.score > max {
            max = w.score;
        }
    });
    if max == f64::NEG_INFINITY {
        return Err(Error::Infeasible(
            "no assignment satisfies the hard rules".to_string(),
        ));
    }
    let r = sub.num_rules;
    let mut z = 0.0;
    let mut marg = vec![0.0; sub.k];
    let mut mean = vec![0.0; r];
    let mut second = if want_cov { vec![0.0; r * r] } else { Vec::new() };
    walk(sub, |w| {
        if !w.feasible() {
            return;
        }
        let p = (w.score - max).exp();
        z += p;
        for (m, &v) in marg.iter_mut().zip(&w.values) {
            if v {
                *m += p;
            }
        }
        for (i, &n) in w.counts.iter().enumerate() {
            mean[i] += p * n;
        }
        if want_cov {
            for i in 0..r {
                let pi = p * w.counts[i];
                for j in 0..r {
                    second[i * r + j] += pi * w.counts[j];
                }
            }
        }
    });
    marg.iter_mut().for_each(|m| *m /= z);
    mean.iter_mut().for_each(|m| *m /= z);
    if want_cov {
        for i in 0..r {
            for j in 0..r {
                second[i * r + j] = second[i * r + j] / z - mean[i] * mean[j];
            }
        }
    }
    Ok(CompStats {
        marginals: marg,
        mean,
        cov: second,
        log_z: Some(max + z.ln()),
    })
}

/// Draws one assignment from the exact distribution of the component.
pub fn exact_sample<R: Rng>(sub: &Sub, rng: &mut R) -> Result<Vec<bool>> {
    let mut max = f64::NEG_INFINITY;
    walk(sub, |w| {
        if w.feasible() && w.score > max {
            max = w.score;
        }
    });
    if max == f64::NEG_INFINITY {
        return Err(Error::Infeasible(
            "no assignment satisfies the hard rules".to_string(),
        ));
    }
    let mut z = 0.0;
    walk(sub, |w| {
        if w.feasible() {
            z += (w.score - max).exp();
        }
    });
    let target = rng.gen::<f64>() * z;
    let mut acc = 0.0;
    let mut chosen: Option<Vec<bool>> = None;
    let mut last_feasible: Option<Vec<bool>> = None;
    walk(sub, |w| {
        if chosen.is_some() || !w.feasible() {
            return;
        }
        acc += (w.score - max).exp();
        if acc >= target {
            chosen = Some(w.values.clone());
        } else {
            last_feasible = Some(w.values.clone());
        }
    });
    // Rounding can leave `acc` a hair below `target` at the end.
    Ok(chosen.or(last_feasible).expect("feasible assignment exists"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{GroundLiteral, ProgramBuilder, Weight};
    use crate::mln::compiled::Compiled;

    #[test]
    fn single_implication_marginals() {
        let w: f64 = 1.3;
        let mut b = ProgramBuilder::new();
        let p = b.prop("p");
        let q = b.prop("q");
        b.clause(Weight::Soft(w), vec![GroundLiteral::pos(p)], GroundLiteral::pos(q));
        let c = Compiled::new(&b.build().unwrap()).unwrap();
        assert_eq!(c.components.len(), 1);
        let sub = Sub::new(&c, &c.components[0]);
        let s = exact_stats(&sub, true).unwrap();
        let e = w.exp();
        let z = 1.0 + 3.0 * e;
        // (p,q) = (1,0) weighs 1, the other three worlds weigh e^w.
        assert!((s.marginals[0] - (e + 1.0) / z).abs() < 1e-12);
        assert!((s.marginals[1] - 2.0 * e / z).abs() < 1e-12);
        assert!((s.log_z.unwrap() - z.ln()).abs() < 1e-12);
        let mean = 3.0 * e / z;
        assert!((s.mean[0] - mean).abs() < 1e-12);
        assert!((s.cov[0] - (mean - mean * mean)).abs() < 1e-12);
    }
}
