//! EM for latent preferences observed through mentions.
//!
//! A mention is reported with probability S(category) when the latent
//! preference holds and never otherwise. Any positive mention therefore
//! pins its latent atom to true; a latent atom whose mentions are all absent
//! gets the unary log-odds sum of ln(1 - S).

use super::compiled::Compiled;
use super::learn::newton_direction;
use super::{infer_compiled, MlnConfig};
use crate::error::{Error, Result};
use crate::logic::{AtomId, GroundedProgram, Weight};

/// One mention slot: a latent atom and whether its mention was observed.
#[derive(Clone, Debug, PartialEq)]
pub struct MentionLink {
    pub latent: AtomId,
    pub observed: bool,
    /// Index into the category list given to [`em_learn`].
    pub category: usize,
}

/// Per-category report probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct MentionModel {
    pub categories: Vec<String>,
    pub report_prob: Vec<f64>,
}

impl MentionModel {
    pub fn get(&self, category: &str) -> Option<f64> {
        self.categories
            .iter()
            .position(|c| c == category)
            .map(|i| self.report_prob[i])
    }
}

#[derive(Clone, Debug)]
pub struct EmConfig {
    pub max_rounds: usize,
    /// Stop when S and the weights move less than this in a round.
    pub tolerance: f64,
    pub initial_s: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_rounds: 100,
            tolerance: 1e-4,
            initial_s: 0.5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EmReport {
    pub weights: Vec<Weight>,
    pub model: MentionModel,
    pub rounds: usize,
    pub converged: bool,
    /// Posterior P(latent = true) per program atom after the last E-step.
    pub posterior: Vec<f64>,
}

pub const S_MIN: f64 = 0.01;
pub const S_MAX: f64 = 0.99;

/// Runs EM with latent atoms left open in `program`. Non-latent query atoms
/// should already carry their observed values as evidence.
pub fn em_learn(
    program: &GroundedProgram,
    links: &[MentionLink],
    categories: &[String],
    cfg: &MlnConfig,
    em: &EmConfig,
    learnable: Option<&[bool]>,
) -> Result<EmReport> {
    cfg.validate()?;
    if !(em.initial_s > 0.0 && em.initial_s < 1.0) {
        return Err(Error::Config("initial S must lie in (0, 1)".into()));
    }
    if links.is_empty() {
        return Err(Error::Data("no latent atoms to estimate".into()));
    }
    let n = program.num_atoms();
    let mut clamp = vec![false; n];
    let mut is_latent = vec![false; n];
    for l in links {
        if l.latent >= n {
            return Err(Error::AtomMissing(l.latent));
        }
        if l.category >= categories.len() {
            return Err(Error::Data(format!("mention category index {} out of range", l.category)));
        }
        if program.hard_value(l.latent).is_some() {
            return Err(Error::Data(format!(
                "latent atom {} is fixed by evidence",
                program.atom(l.latent)
            )));
        }
        is_latent[l.latent] = true;
        clamp[l.latent] |= l.observed;
    }

    let r = program.num_first_order_rules();
    let init: Vec<Weight> = program.weights().to_vec();
    let mut w: Vec<f64> = init.iter().map(|x| x.value().unwrap_or(0.0)).collect();
    let total_mentions = links.iter().filter(|l| l.observed).count();
    if total_mentions == 0 {
        return Ok(EmReport {
            weights: init,
            model: MentionModel {
                categories: categories.to_vec(),
                report_prob: vec![S_MIN; categories.len()],
            },
            rounds: 0,
            converged: true,
            posterior: vec![0.0; n],
        });
    }

    let mut model = Compiled::new(program)?;
    let updates: Vec<(AtomId, Option<f64>)> = (0..n)
        .filter(|&a| clamp[a])
        .map(|a| (a, Some(1.0)))
        .collect();
    let mut post = Compiled::new(&program.with_evidence(&updates)?)?;
    let base_bias = post.bias.clone();

    let hard: Vec<bool> = init.iter().map(|x| x.is_hard()).collect();
    let mut touched = vec![false; r];
    for c in model.clauses.iter().chain(&post.clauses) {
        touched[c.rule] = true;
    }
    let active: Vec<usize> = (0..r)
        .filter(|&i| !hard[i] && touched[i] && learnable.is_none_or(|m| m[i]))
        .collect();
    let ridge = cfg.l2.max(1e-9);

    let mut s = vec![em.initial_s; categories.len()];
    let mut posterior = vec![0.0; n];
    let mut converged = false;
    let mut rounds = 0;
    for round in 0..em.max_rounds {
        rounds = round + 1;
        // E-step: absent mentions lower the odds of their latent atom.
        post.bias.clone_from(&base_bias);
        for l in links {
            if clamp[l.latent] {
                continue;
            }
            let local = post.local_of[l.latent].expect("unclamped latent is free") as usize;
            post.bias[local] += (1.0 - s[l.category]).ln();
        }
        post.set_weights(&w);
        model.set_weights(&w);
        let pr = infer_compiled(&post, cfg, false)?;
        posterior.clone_from(&pr.marginals);

        // M-step for S.
        let mut num = vec![0.0; categories.len()];
        let mut den = vec![0.0; categories.len()];
        for l in links {
            if l.observed {
                num[l.category] += 1.0;
            }
            den[l.category] += pr.marginals[l.latent];
        }
        let mut delta: f64 = 0.0;
        for c in 0..categories.len() {
            let next = if den[c] > 1e-12 {
                (num[c] / den[c]).clamp(S_MIN, S_MAX)
            } else {
                S_MIN
            };
            delta = delta.max((next - s[c]).abs());
            s[c] = next;
        }

        // M-step for the weights: one Newton step on E_post[n] - E_model[n].
        if !active.is_empty() {
            let mr = infer_compiled(&model, cfg, true)?;
            let cov = mr.covariance.expect("requested");
            let mut grad = vec![0.0; r];
            for &i in &active {
                grad[i] = pr.expected_counts[i] - mr.expected_counts[i] - cfg.l2 * w[i];
            }
            let step = newton_direction(&grad, &cov, &active, ridge);
            for &i in &active {
                let next = (w[i] + cfg.learn_rate * step[i]).clamp(-cfg.weight_cap, cfg.weight_cap);
                delta = delta.max((next - w[i]).abs());
                w[i] = next;
            }
        }
        if delta < em.tolerance {
            converged = true;
            break;
        }
    }
    for (a, p) in posterior.iter_mut().enumerate() {
        if !is_latent[a] {
            *p = 0.0;
        }
    }
    let weights = init
        .iter()
        .zip(&w)
        .map(|(orig, &v)| match orig {
            Weight::Hard => Weight::Hard,
            Weight::Soft(_) => Weight::Soft(v),
        })
        .collect();
    Ok(EmReport {
        weights,
        model: MentionModel {
            categories: categories.to_vec(),
            report_prob: s,
        },
        rounds,
        converged,
        posterior,
    })
}
