//! Blocked Gibbs sampling over one component.
//!
//! Atoms tied together by hard clauses form blocks; blocks of at most
//! `max_block_atoms` are resampled jointly from their exact conditional, so
//! the chain can move between hard-feasible states that single flips would
//! never connect. Remaining atoms are updated one at a time and contribute
//! their conditional probability (Rao-Blackwellized) to the marginals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::compiled::Sub;
use super::exact::CompStats;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct GibbsParams {
    pub burn_in: usize,
    /// Samples summed over all chains.
    pub samples: usize,
    pub chains: usize,
    pub seed: u64,
    pub max_block_atoms: usize,
}

/// Mixes a component index into the base seed.
pub(crate) fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

enum Unit {
    Site(u32),
    Block { atoms: Vec<u32>, clauses: Vec<u32> },
}

struct State<'a> {
    sub: &'a Sub,
    values: Vec<bool>,
    sat: Vec<u32>,
}

impl<'a> State<'a> {
    fn new(sub: &'a Sub, values: Vec<bool>) -> Self {
        let sat = sub
            .clauses
            .iter()
            .map(|c| c.lits.iter().filter(|&&(a, w)| values[a as usize] == w).count() as u32)
            .collect();
        State { sub, values, sat }
    }

    fn set(&mut self, a: usize, v: bool) {
        if self.values[a] == v {
            return;
        }
        self.values[a] = v;
        for &(c, want) in &self.sub.occurs[a] {
            if v == want {
                self.sat[c as usize] += 1;
            } else {
                self.sat[c as usize] -= 1;
            }
        }
    }

    fn hard_broken(&self) -> Vec<u32> {
        self.sub
            .clauses
            .iter()
            .enumerate()
            .filter(|(c, cl)| cl.hard && self.sat[*c] == 0)
            .map(|(c, _)| c as u32)
            .collect()
    }

    /// Hard clauses that flipping `a` would break.
    fn break_count(&self, a: usize) -> usize {
        let v = self.values[a];
        self.sub.occurs[a]
            .iter()
            .filter(|&&(c, want)| {
                self.sub.clauses[c as usize].hard && want == v && self.sat[c as usize] == 1
            })
            .count()
    }

    /// P(a = true | rest), or `None` when the hard clauses leave no valid
    /// value given the rest.
    fn conditional(&self, a: usize) -> Option<f64> {
        let cur = self.values[a];
        let mut delta = self.sub.bias[a];
        let (mut need_true, mut need_false) = (false, false);
        for &(c, want) in &self.sub.occurs[a] {
            let clause = &self.sub.clauses[c as usize];
            let others = self.sat[c as usize] - u32::from(cur == want);
            if others > 0 {
                continue;
            }
            if clause.hard {
                if want {
                    need_true = true;
                } else {
                    need_false = true;
                }
            } else if want {
                delta += clause.weight;
            } else {
                delta -= clause.weight;
            }
        }
        match (need_true, need_false) {
            (true, true) => None,
            (true, false) => Some(1.0),
            (false, true) => Some(0.0),
            (false, false) => Some(1.0 / (1.0 + (-delta).exp())),
        }
    }
}

fn units(sub: &Sub, max_block: usize) -> Vec<Unit> {
    let k = sub.k;
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for c in sub.clauses.iter().filter(|c| c.hard) {
        let first = c.lits[0].0 as usize;
        for &(a, _) in &c.lits[1..] {
            let (ra, rb) = (find(&mut parent, first), find(&mut parent, a as usize));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); k];
    for a in 0..k {
        let r = find(&mut parent, a);
        groups[r].push(a as u32);
    }
    let mut out = Vec::new();
    for (root, g) in groups.into_iter().enumerate() {
        if g.is_empty() || root != g[0] as usize {
            continue;
        }
        if g.len() == 1 || g.len() > max_block {
            out.extend(g.into_iter().map(Unit::Site));
        } else {
            let mut clauses: Vec<u32> = g
                .iter()
                .flat_map(|&a| sub.occurs[a as usize].iter().map(|&(c, _)| c))
                .collect();
            clauses.sort_unstable();
            clauses.dedup();
            out.push(Unit::Block { atoms: g, clauses });
        }
    }
    out
}

/// Random start repaired toward hard feasibility with WalkSAT moves.
fn initial_state<'a>(sub: &'a Sub, rng: &mut ChaCha8Rng) -> Result<State<'a>> {
    const RESTARTS: usize = 10;
    let max_flips = 100 * sub.k + 1000;
    for _ in 0..RESTARTS {
        let values: Vec<bool> = (0..sub.k).map(|_| rng.gen::<bool>()).collect();
        let mut st = State::new(sub, values);
        for _ in 0..max_flips {
            let broken = st.hard_broken();
            if broken.is_empty() {
                return Ok(st);
            }
            let c = broken[rng.gen_range(0..broken.len())] as usize;
            let lits = &sub.clauses[c].lits;
            let a = if rng.gen::<f64>() < 0.5 {
                lits[rng.gen_range(0..lits.len())].0 as usize
            } else {
                lits.iter()
                    .map(|&(a, _)| a as usize)
                    .min_by_key(|&a| st.break_count(a))
                    .expect("clause has literals")
            };
            let v = !st.values[a];
            st.set(a, v);
        }
    }
    Err(Error::Infeasible(
        "no assignment satisfying the hard rules was found".to_string(),
    ))
}

struct Acc {
    marg: Vec<f64>,
    mean: Vec<f64>,
    second: Vec<f64>,
    n: usize,
}

fn run_chain(sub: &Sub, units: &[Unit], params: &GibbsParams, seed: u64, chain: u64, samples: usize, want_cov: bool) -> Result<Acc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    let mut st = initial_state(sub, &mut rng)?;
    let r = sub.num_rules;
    let mut acc = Acc {
        marg: vec![0.0; sub.k],
        mean: vec![0.0; r],
        second: if want_cov { vec![0.0; r * r] } else { Vec::new() },
        n: 0,
    };
    let mut probs = vec![0.0; sub.k];
    let mut counts = vec![0.0; r];
    let mut block_w: Vec<f64> = Vec::new();
    for sweep in 0..params.burn_in + samples {
        for unit in units {
            match unit {
                Unit::Site(a) => {
                    let a = *a as usize;
                    let p = match st.conditional(a) {
                        Some(p) => p,
                        None => f64::from(u8::from(st.values[a])),
                    };
                    probs[a] = p;
                    let v = rng.gen::<f64>() < p;
                    st.set(a, v);
                }
                Unit::Block { atoms, clauses } => {
                    sample_block(&mut st, atoms, clauses, &mut block_w, &mut rng);
                    for &a in atoms {
                        probs[a as usize] = f64::from(u8::from(st.values[a as usize]));
                    }
                }
            }
        }
        if sweep < params.burn_in {
            continue;
        }
        acc.n += 1;
        for (m, p) in acc.marg.iter_mut().zip(&probs) {
            *m += p;
        }
        counts.iter_mut().for_each(|x| *x = 0.0);
        for (c, clause) in sub.clauses.iter().enumerate() {
            if st.sat[c] > 0 {
                counts[clause.rule as usize] += 1.0;
            }
        }
        for i in 0..r {
            acc.mean[i] += counts[i];
            if want_cov {
                for j in 0..r {
                    acc.second[i * r + j] += counts[i] * counts[j];
                }
            }
        }
    }
    Ok(acc)
}

fn sample_block(st: &mut State<'_>, atoms: &[u32], clauses: &[u32], weights: &mut Vec<f64>, rng: &mut ChaCha8Rng) {
    let b = atoms.len();
    weights.clear();
    let mut max = f64::NEG_INFINITY;
    for mask in 0..(1usize << b) {
        for (i, &a) in atoms.iter().enumerate() {
            st.set(a as usize, mask >> i & 1 == 1);
        }
        let mut s = 0.0;
        for (i, &a) in atoms.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s += st.sub.bias[a as usize];
            }
        }
        for &c in clauses {
            let clause = &st.sub.clauses[c as usize];
            if st.sat[c as usize] > 0 {
                s += clause.weight;
            } else if clause.hard {
                s = f64::NEG_INFINITY;
                break;
            }
        }
        max = max.max(s);
        weights.push(s);
    }
    let chosen = if max == f64::NEG_INFINITY {
        // Outside hard clauses conflict with every block state; keep moving
        // uniformly until the other units repair it.
        rng.gen_range(0..weights.len())
    } else {
        let mut z = 0.0;
        for w in weights.iter_mut() {
            *w = (*w - max).exp();
            z += *w;
        }
        let mut t = rng.gen::<f64>() * z;
        let mut pick = weights.len() - 1;
        for (i, &w) in weights.iter().enumerate() {
            if t < w {
                pick = i;
                break;
            }
            t -= w;
        }
        pick
    };
    for (i, &a) in atoms.iter().enumerate() {
        st.set(a as usize, chosen >> i & 1 == 1);
    }
}

/// Runs `params.chains` chains in parallel and pools their statistics in
/// chain order, so results do not depend on the thread count.
pub fn gibbs_stats(sub: &Sub, params: &GibbsParams, salt: u64, want_cov: bool) -> Result<CompStats> {
    let chains = params.chains.max(1);
    let per_chain = params.samples.div_ceil(chains).max(1);
    let units = units(sub, params.max_block_atoms);
    let seed = derive_seed(params.seed, salt);
    let accs: Vec<Result<Acc>> = (0..chains as u64)
        .into_par_iter()
        .map(|c| run_chain(sub, &units, params, seed, c, per_chain, want_cov))
        .collect();
    let r = sub.num_rules;
    let mut marg = vec![0.0; sub.k];
    let mut mean = vec![0.0; r];
    let mut second = if want_cov { vec![0.0; r * r] } else { Vec::new() };
    let mut n = 0usize;
    for acc in accs {
        let acc = acc?;
        n += acc.n;
        for (m, x) in marg.iter_mut().zip(&acc.marg) {
            *m += x;
        }
        for (m, x) in mean.iter_mut().zip(&acc.mean) {
            *m += x;
        }
        for (m, x) in second.iter_mut().zip(&acc.second) {
            *m += x;
        }
    }
    let nf = n as f64;
    marg.iter_mut().for_each(|m| *m /= nf);
    mean.iter_mut().for_each(|m| *m /= nf);
    if want_cov {
        for i in 0..r {
            for j in 0..r {
                second[i * r + j] = second[i * r + j] / nf - mean[i] * mean[j];
            }
        }
    }
    Ok(CompStats {
        marginals: marg,
        mean,
        cov: second,
        log_z: None,
    })
}
