//! Consensus ADMM for components too large for the dense simplex.
//!
//! Each hinge `lambda * max(0, a.z + b)` and each hard constraint
//! `a.z + b <= 0` keeps a local copy of its atoms; the consensus variable is
//! the box-clipped average of local copies plus scaled duals.

use super::LinearTerm;

#[derive(Clone, Debug)]
pub struct AdmmParams {
    pub rho: f64,
    pub max_iters: usize,
    pub tolerance: f64,
}

struct Local<'a> {
    term: &'a LinearTerm,
    lambda: Option<f64>,
    z: Vec<f64>,
    u: Vec<f64>,
    norm2: f64,
}

fn hinge_prox(term: &LinearTerm, lambda: Option<f64>, v: &[f64], rho: f64, norm2: f64, out: &mut [f64]) {
    let lin = |z: &[f64]| -> f64 {
        term.coefs.iter().zip(z).map(|(&(_, a), &x)| a * x).sum::<f64>() + term.constant
    };
    out.copy_from_slice(v);
    if lin(v) <= 0.0 || norm2 == 0.0 {
        return;
    }
    if let Some(lambda) = lambda {
        let step = lambda / rho;
        for (o, &(_, a)) in out.iter_mut().zip(&term.coefs) {
            *o -= step * a;
        }
        if lin(out) >= 0.0 {
            return;
        }
    }
    let excess = lin(v) / norm2;
    for ((o, &x), &(_, a)) in out.iter_mut().zip(v).zip(&term.coefs) {
        *o = x - excess * a;
    }
}

/// Returns values for `num_atoms` component-local atoms.
pub fn solve(
    num_atoms: usize,
    soft: &[(f64, LinearTerm)],
    hard: &[LinearTerm],
    params: &AdmmParams,
) -> Vec<f64> {
    let mut locals: Vec<Local<'_>> = soft
        .iter()
        .map(|(l, t)| (Some(*l), t))
        .chain(hard.iter().map(|t| (None, t)))
        .map(|(lambda, term)| Local {
            term,
            lambda,
            z: vec![0.5; term.coefs.len()],
            u: vec![0.0; term.coefs.len()],
            norm2: term.coefs.iter().map(|(_, a)| a * a).sum(),
        })
        .collect();
    let mut degree = vec![0usize; num_atoms];
    for l in &locals {
        for &(a, _) in &l.term.coefs {
            degree[a] += 1;
        }
    }
    let mut x = vec![0.5; num_atoms];
    let mut sum = vec![0.0; num_atoms];
    let mut v = Vec::new();
    let mut out = Vec::new();
    let rho = params.rho;
    for _ in 0..params.max_iters {
        for l in locals.iter_mut() {
            v.clear();
            v.extend(l.term.coefs.iter().zip(&l.u).map(|(&(a, _), &u)| x[a] - u));
            out.resize(v.len(), 0.0);
            hinge_prox(l.term, l.lambda, &v, rho, l.norm2, &mut out);
            l.z.copy_from_slice(&out);
        }
        sum.iter_mut().for_each(|s| *s = 0.0);
        for l in &locals {
            for ((&(a, _), &z), &u) in l.term.coefs.iter().zip(&l.z).zip(&l.u) {
                sum[a] += z + u;
            }
        }
        let mut dual: f64 = 0.0;
        for a in 0..num_atoms {
            let next = if degree[a] == 0 {
                0.5
            } else {
                (sum[a] / degree[a] as f64).clamp(0.0, 1.0)
            };
            dual = dual.max((next - x[a]).abs());
            x[a] = next;
        }
        let mut primal: f64 = 0.0;
        for l in locals.iter_mut() {
            for ((&(a, _), &z), u) in l.term.coefs.iter().zip(&l.z).zip(l.u.iter_mut()) {
                let r = z - x[a];
                *u += r;
                primal = primal.max(r.abs());
            }
        }
        if primal < params.tolerance && dual < params.tolerance {
            break;
        }
    }
    x
}
