//! Discriminative weight learning: maximizes the conditional log-likelihood
//! of the observed query atoms given the evidence.
//!
//! Each epoch takes a damped Newton step using the count covariance as the
//! curvature, capped at unit length per coordinate. When every component is
//! exact the step is backtracked until the objective improves; with sampled
//! expectations the second half of the iterates is averaged instead.

use super::compiled::Compiled;
use super::{infer_compiled, MlnConfig};
use crate::error::{Error, Result};
use crate::logic::{GroundedProgram, Weight};

/// A grounded program with query atoms left open, plus the observed world
/// (indexed by program atom; entries for evidence atoms are ignored).
#[derive(Clone, Debug)]
pub struct TrainingInstance {
    pub program: GroundedProgram,
    pub truth: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct LearnReport {
    pub weights: Vec<Weight>,
    pub epochs: usize,
    pub converged: bool,
    /// Final penalized conditional log-likelihood when it is computable.
    pub objective: Option<f64>,
    pub gradient_norm: f64,
}

const GRAD_TOL: f64 = 1e-7;
const MAX_STEP: f64 = 1.0;
const BACKTRACKS: usize = 30;

/// Solves `a x = b` for a dense row-major `n x n` matrix by Gaussian
/// elimination with partial pivoting. `None` when singular.
pub(crate) fn solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row * n + k] * x[k];
        }
        x[row] = s / a[row * n + row];
    }
    Some(x)
}

/// Newton direction restricted to the `active` coordinates.
pub(crate) fn newton_direction(grad: &[f64], cov: &[f64], active: &[usize], ridge: f64) -> Vec<f64> {
    let r = grad.len();
    let m = active.len();
    let mut h = vec![0.0; m * m];
    for (i, &gi) in active.iter().enumerate() {
        for (j, &gj) in active.iter().enumerate() {
            h[i * m + j] = cov[gi * r + gj];
        }
        h[i * m + i] += ridge;
    }
    let g: Vec<f64> = active.iter().map(|&i| grad[i]).collect();
    let x = solve(h, g.clone()).unwrap_or(g);
    let mut full = vec![0.0; r];
    for (&i, v) in active.iter().zip(x) {
        full[i] = v;
    }
    let biggest = full.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if biggest > MAX_STEP {
        full.iter_mut().for_each(|v| *v *= MAX_STEP / biggest);
    }
    full
}

struct Prepared {
    compiled: Vec<Compiled>,
    locals: Vec<Vec<bool>>,
    n_data: Vec<f64>,
    active: Vec<usize>,
}

fn prepare(instances: &[TrainingInstance], learnable: Option<&[bool]>) -> Result<Prepared> {
    let first = instances
        .first()
        .ok_or_else(|| Error::Data("no training instances".into()))?;
    let r = first.program.num_first_order_rules();
    let hard: Vec<bool> = first.program.weights().iter().map(|w| w.is_hard()).collect();
    if let Some(mask) = learnable {
        if mask.len() != r {
            return Err(Error::Config(format!("learnable mask has {} entries for {r} rules", mask.len())));
        }
    }
    let mut compiled = Vec::with_capacity(instances.len());
    let mut locals = Vec::with_capacity(instances.len());
    let mut n_data = vec![0.0; r];
    let mut touched = vec![false; r];
    let mut any_free = false;
    for (k, inst) in instances.iter().enumerate() {
        if inst.program.num_first_order_rules() != r {
            return Err(Error::Data(format!("instance {k} has a different rule set")));
        }
        if inst.truth.len() != inst.program.num_atoms() {
            return Err(Error::Data(format!(
                "instance {k}: world has {} values for {} atoms",
                inst.truth.len(),
                inst.program.num_atoms()
            )));
        }
        let c = Compiled::new(&inst.program)?;
        let local = c.localize(&inst.truth);
        if c.score(&local) == f64::NEG_INFINITY {
            return Err(Error::Data(format!("instance {k}: observed world violates a hard rule")));
        }
        any_free |= c.num_free() > 0;
        for (i, n) in c.counts(&local).into_iter().enumerate() {
            n_data[i] += n;
        }
        for cl in &c.clauses {
            touched[cl.rule] = true;
        }
        compiled.push(c);
        locals.push(local);
    }
    if !any_free {
        return Err(Error::Data("no query atom was grounded".into()));
    }
    let active = (0..r)
        .filter(|&i| !hard[i] && touched[i] && learnable.is_none_or(|m| m[i]))
        .collect();
    Ok(Prepared {
        compiled,
        locals,
        n_data,
        active,
    })
}

/// Penalized conditional log-likelihood, when every component is exact.
fn objective(p: &mut Prepared, w: &[f64], cfg: &MlnConfig) -> Result<Option<f64>> {
    let mut total = 0.0;
    for (c, local) in p.compiled.iter_mut().zip(&p.locals) {
        c.set_weights(w);
        let res = infer_compiled(c, cfg, false)?;
        match res.log_z {
            Some(z) => total += c.score(local) - z,
            None => return Ok(None),
        }
    }
    let pen: f64 = p.active.iter().map(|&i| w[i] * w[i]).sum();
    Ok(Some(total - 0.5 * cfg.l2 * pen))
}

/// Gradient n(observed) - E[n] - l2 w and summed count covariance.
fn moments(p: &mut Prepared, w: &[f64], cfg: &MlnConfig) -> Result<(Vec<f64>, Vec<f64>, bool)> {
    let r = w.len();
    let mut grad = p.n_data.clone();
    let mut cov = vec![0.0; r * r];
    let mut exact = true;
    for c in p.compiled.iter_mut() {
        c.set_weights(w);
        let res = infer_compiled(c, cfg, true)?;
        // Constant groundings appear on both sides and cancel.
        for (i, g) in grad.iter_mut().enumerate() {
            *g -= res.expected_counts[i] - c.const_counts[i];
        }
        for (a, b) in cov.iter_mut().zip(res.covariance.expect("requested")) {
            *a += b;
        }
        exact &= res.log_z.is_some();
    }
    let mut masked = vec![0.0; r];
    for &i in &p.active {
        masked[i] = grad[i] - cfg.l2 * w[i];
    }
    Ok((masked, cov, exact))
}

/// Learns soft rule weights from fully observed training worlds. Hard rules,
/// rules masked out by `learnable`, and rules with no non-constant
/// grounding keep their current weights.
pub fn learn_weights(
    instances: &[TrainingInstance],
    cfg: &MlnConfig,
    learnable: Option<&[bool]>,
) -> Result<LearnReport> {
    cfg.validate()?;
    let mut p = prepare(instances, learnable)?;
    let init = instances[0].program.weights().to_vec();
    let mut w: Vec<f64> = init.iter().map(|x| x.value().unwrap_or(0.0)).collect();
    clamp_weights_active(&mut w, &p.active, cfg.weight_cap);
    let ridge = cfg.l2.max(1e-9);

    let mut converged = false;
    let mut gnorm = f64::INFINITY;
    let mut epochs = 0;
    let mut history: Vec<Vec<f64>> = Vec::new();
    let mut sampled = false;
    for epoch in 0..cfg.epochs {
        epochs = epoch + 1;
        let (grad, cov, exact) = moments(&mut p, &w, cfg)?;
        gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm < GRAD_TOL || p.active.is_empty() {
            converged = true;
            break;
        }
        let mut step = newton_direction(&grad, &cov, &p.active, ridge);
        step.iter_mut().for_each(|s| *s *= cfg.learn_rate);
        if exact {
            let f0 = objective(&mut p, &w, cfg)?.expect("exact");
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..BACKTRACKS {
                let mut trial: Vec<f64> = w.iter().zip(&step).map(|(a, s)| a + t * s).collect();
                clamp_weights_active(&mut trial, &p.active, cfg.weight_cap);
                let f1 = objective(&mut p, &trial, cfg)?.expect("exact");
                if f1 > f0 {
                    accepted = Some(trial);
                    break;
                }
                t *= 0.5;
            }
            match accepted {
                Some(next) => w = next,
                None => {
                    converged = true;
                    break;
                }
            }
        } else {
            sampled = true;
            for (a, s) in w.iter_mut().zip(&step) {
                *a += s;
            }
            clamp_weights_active(&mut w, &p.active, cfg.weight_cap);
            history.push(w.clone());
        }
    }
    if sampled && !history.is_empty() {
        let tail = &history[history.len() / 2..];
        for &i in &p.active {
            w[i] = tail.iter().map(|h| h[i]).sum::<f64>() / tail.len() as f64;
        }
    }
    let objective = objective(&mut p, &w, cfg)?;
    let weights = init
        .iter()
        .zip(&w)
        .map(|(orig, &v)| match orig {
            Weight::Hard => Weight::Hard,
            Weight::Soft(_) => Weight::Soft(v),
        })
        .collect();
    Ok(LearnReport {
        weights,
        epochs,
        converged,
        objective,
        gradient_norm: gnorm,
    })
}

fn clamp_weights_active(w: &mut [f64], active: &[usize], cap: f64) {
    for &i in active {
        w[i] = w[i].clamp(-cap, cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let x = solve(vec![2.0, 1.0, 1.0, 3.0], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
        assert!(solve(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 1.0]).is_none());
    }
}
