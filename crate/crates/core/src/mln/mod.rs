//! Markov logic: exact and sampled marginals, conditional queries, weight
//! learning and EM over latent preference atoms.

pub mod compiled;
mod em;
mod exact;
mod gibbs;
mod learn;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::logic::{AtomId, GroundedProgram};
use compiled::{Compiled, Sub};
use exact::CompStats;

pub use em::{em_learn, EmConfig, EmReport, MentionLink, MentionModel};
pub use gibbs::GibbsParams;
pub use learn::{learn_weights, LearnReport, TrainingInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InferenceMode {
    /// Exact per component when small enough, Gibbs otherwise.
    Auto,
    Exact,
    Gibbs,
}

#[derive(Clone, Debug)]
pub struct MlnConfig {
    pub burn_in: usize,
    /// Post-burn-in sweeps summed over chains.
    pub samples: usize,
    pub chains: usize,
    pub seed: u64,
    /// Largest component enumerated exactly; at most 25.
    pub max_exact_atoms: usize,
    pub weight_cap: f64,
    /// Damping applied to each Newton step.
    pub learn_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub mode: InferenceMode,
    /// Largest hard-clause block resampled jointly by Gibbs.
    pub max_block_atoms: usize,
}

impl Default for MlnConfig {
    fn default() -> Self {
        MlnConfig {
            burn_in: 1000,
            samples: 10_000,
            chains: 4,
            seed: 0,
            max_exact_atoms: 20,
            weight_cap: 10.0,
            learn_rate: 1.0,
            epochs: 100,
            l2: 1e-4,
            mode: InferenceMode::Auto,
            max_block_atoms: 8,
        }
    }
}

pub const EXACT_ATOM_LIMIT: usize = 25;

impl MlnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        if self.chains == 0 {
            return Err(Error::Config("chains must be positive".into()));
        }
        if self.max_exact_atoms > EXACT_ATOM_LIMIT {
            return Err(Error::Config(format!(
                "max_exact_atoms {} exceeds {EXACT_ATOM_LIMIT}",
                self.max_exact_atoms
            )));
        }
        if !(self.weight_cap > 0.0 && self.weight_cap.is_finite()) {
            return Err(Error::Config("weight_cap must be positive and finite".into()));
        }
        if !(self.learn_rate > 0.0 && self.learn_rate <= 1.0) {
            return Err(Error::Config("learn_rate must lie in (0, 1]".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::Config("l2 must be non-negative".into()));
        }
        Ok(())
    }

    pub fn gibbs(&self) -> GibbsParams {
        GibbsParams {
            burn_in: self.burn_in,
            samples: self.samples,
            chains: self.chains,
            seed: self.seed,
            max_block_atoms: self.max_block_atoms,
        }
    }
}

/// Marginals for every program atom plus rule-count moments.
#[derive(Clone, Debug)]
pub struct MlnResult {
    /// P(atom = true); atoms fixed by evidence report their value.
    pub marginals: Vec<f64>,
    /// E[n_i] per first-order rule, constant groundings included.
    pub expected_counts: Vec<f64>,
    /// Cov[n] row-major when requested.
    pub covariance: Option<Vec<f64>>,
    /// log Z over the free atoms; present when every component was exact.
    pub log_z: Option<f64>,
    /// Components solved by sampling.
    pub sampled_components: usize,
}

fn component_stats(
    compiled: &Compiled,
    cfg: &MlnConfig,
    want_cov: bool,
) -> Result<Vec<CompStats>> {
    cfg.validate()?;
    let params = cfg.gibbs();
    compiled
        .components
        .par_iter()
        .enumerate()
        .map(|(i, comp)| {
            let k = comp.atoms.len();
            let exact = match cfg.mode {
                InferenceMode::Exact => {
                    if k > cfg.max_exact_atoms {
                        return Err(Error::TooManyFreeAtoms {
                            found: k,
                            limit: cfg.max_exact_atoms,
                        });
                    }
                    true
                }
                InferenceMode::Auto => k <= cfg.max_exact_atoms,
                InferenceMode::Gibbs => false,
            };
            let sub = Sub::new(compiled, comp);
            if exact {
                exact::exact_stats(&sub, want_cov)
            } else {
                gibbs::gibbs_stats(&sub, &params, i as u64, want_cov)
            }
        })
        .collect()
}

/// Marginals (and optionally count covariance) of a compiled program.
pub fn infer_compiled(compiled: &Compiled, cfg: &MlnConfig, want_cov: bool) -> Result<MlnResult> {
    let stats = component_stats(compiled, cfg, want_cov)?;
    let n_atoms = compiled.fixed.len();
    let r = compiled.num_rules;
    let mut marginals: Vec<f64> = compiled
        .fixed
        .iter()
        .map(|v| v.map_or(0.0, |b| f64::from(u8::from(b))))
        .collect();
    debug_assert_eq!(marginals.len(), n_atoms);
    let mut expected = compiled.const_counts.clone();
    let mut cov = if want_cov { Some(vec![0.0; r * r]) } else { None };
    let mut log_z = Some(0.0);
    let mut sampled = 0;
    for (comp, s) in compiled.components.iter().zip(&stats) {
        for (&a, &m) in comp.atoms.iter().zip(&s.marginals) {
            marginals[compiled.free[a as usize]] = m;
        }
        for (li, &gi) in comp.rules.iter().enumerate() {
            expected[gi] += s.mean[li];
        }
        if let Some(cov) = cov.as_mut() {
            let lr = comp.rules.len();
            for (li, &gi) in comp.rules.iter().enumerate() {
                for (lj, &gj) in comp.rules.iter().enumerate() {
                    cov[gi * r + gj] += s.cov[li * lr + lj];
                }
            }
        }
        match (log_z, s.log_z) {
            (Some(z), Some(c)) => log_z = Some(z + c),
            _ => {
                log_z = None;
                sampled += 1;
            }
        }
    }
    Ok(MlnResult {
        marginals,
        expected_counts: expected,
        covariance: cov,
        log_z,
        sampled_components: sampled,
    })
}

/// Marginals of every atom under `program`.
pub fn infer(program: &GroundedProgram, cfg: &MlnConfig) -> Result<MlnResult> {
    infer_compiled(&Compiled::new(program)?, cfg, false)
}

/// Exact marginals; fails when a component exceeds `max_exact_atoms`.
pub fn exact_query(program: &GroundedProgram, query: &[AtomId], cfg: &MlnConfig) -> Result<Vec<f64>> {
    let cfg = MlnConfig {
        mode: InferenceMode::Exact,
        ..cfg.clone()
    };
    let res = infer(program, &cfg)?;
    pick(&res.marginals, query)
}

/// Gibbs marginals for every component regardless of size.
pub fn gibbs_query(program: &GroundedProgram, query: &[AtomId], cfg: &MlnConfig) -> Result<Vec<f64>> {
    let cfg = MlnConfig {
        mode: InferenceMode::Gibbs,
        ..cfg.clone()
    };
    let res = infer(program, &cfg)?;
    pick(&res.marginals, query)
}

fn pick(marginals: &[f64], query: &[AtomId]) -> Result<Vec<f64>> {
    query
        .iter()
        .map(|&a| marginals.get(a).copied().ok_or(Error::AtomMissing(a)))
        .collect()
}

/// P(Y | X) using only the ground rules that mention a query atom.
pub fn conditional_query(
    program: &GroundedProgram,
    query: &[AtomId],
    given: &[(AtomId, bool)],
    cfg: &MlnConfig,
) -> Result<Vec<f64>> {
    let n = program.num_atoms();
    let mut in_query = vec![false; n];
    for &q in query {
        if q >= n {
            return Err(Error::AtomMissing(q));
        }
        if program.hard_value(q).is_some() {
            return Err(Error::Data(format!(
                "query atom {} is fixed by evidence",
                program.atom(q)
            )));
        }
        in_query[q] = true;
    }
    let mut updates = Vec::with_capacity(given.len());
    for &(x, v) in given {
        if x >= n {
            return Err(Error::AtomMissing(x));
        }
        if in_query[x] {
            return Err(Error::Data(format!(
                "atom {} is both queried and given",
                program.atom(x)
            )));
        }
        updates.push((x, Some(f64::from(u8::from(v)))));
    }
    let restricted = program
        .restrict_rules(|r| r.literals().any(|l| in_query[l.atom]))
        .with_evidence(&updates)?;
    let res = infer(&restricted, cfg)?;
    pick(&res.marginals, query)
}

/// P(t = true | every other atom as in `world`) for each target, using the
/// ground rules that mention `t`. Equivalent to [`conditional_query`] with a
/// single query atom and all remaining atoms given.
pub fn site_marginals(program: &GroundedProgram, world: &[bool], targets: &[AtomId]) -> Result<Vec<f64>> {
    let n = program.num_atoms();
    if world.len() != n {
        return Err(Error::Data(format!("world has {} values for {n} atoms", world.len())));
    }
    targets
        .par_iter()
        .map(|&t| {
            if t >= n {
                return Err(Error::AtomMissing(t));
            }
            if program.hard_value(t).is_some() {
                return Err(Error::Data(format!("query atom {} is fixed by evidence", program.atom(t))));
            }
            let mut logit = program.evidence(t).map_or(0.0, |v| v.ln() - (1.0 - v).ln());
            let (mut ok_true, mut ok_false) = (true, true);
            for &g in program.rules_of(t) {
                let rule = &program.rules()[g];
                let sat = |v: bool| {
                    let val = |a: AtomId| if a == t { v } else { world[a] };
                    !rule.body.iter().all(|l| l.holds(val(l.atom))) || rule.head.holds(val(rule.head.atom))
                };
                let (s1, s0) = (sat(true), sat(false));
                match program.weight_of(g).value() {
                    Some(w) => logit += w * (f64::from(u8::from(s1)) - f64::from(u8::from(s0))),
                    None => {
                        ok_true &= s1;
                        ok_false &= s0;
                    }
                }
            }
            match (ok_true, ok_false) {
                (true, true) => Ok(1.0 / (1.0 + (-logit).exp())),
                (true, false) => Ok(1.0),
                (false, true) => Ok(0.0),
                (false, false) => Err(Error::Infeasible(format!(
                    "no value of {} satisfies the hard rules",
                    program.atom(t)
                ))),
            }
        })
        .collect()
}

/// One exact joint sample of all atoms; evidence atoms keep their values.
/// Every component must be enumerable.
pub fn sample_world(program: &GroundedProgram, cfg: &MlnConfig) -> Result<Vec<bool>> {
    cfg.validate()?;
    let compiled = Compiled::new(program)?;
    let draws: Vec<Result<Vec<bool>>> = compiled
        .components
        .par_iter()
        .enumerate()
        .map(|(i, comp)| {
            if comp.atoms.len() > cfg.max_exact_atoms {
                return Err(Error::TooManyFreeAtoms {
                    found: comp.atoms.len(),
                    limit: cfg.max_exact_atoms,
                });
            }
            let sub = Sub::new(&compiled, comp);
            let mut rng = ChaCha8Rng::seed_from_u64(gibbs::derive_seed(cfg.seed, i as u64));
            exact::exact_sample(&sub, &mut rng)
        })
        .collect();
    let mut world: Vec<bool> = compiled.fixed.iter().map(|v| v.unwrap_or(false)).collect();
    for (comp, draw) in compiled.components.iter().zip(draws) {
        for (&a, v) in comp.atoms.iter().zip(draw?) {
            world[compiled.free[a as usize]] = v;
        }
    }
    Ok(world)
}
