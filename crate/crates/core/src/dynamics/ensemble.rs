//! Monte Carlo oracle: sample the initial Gaussian, push every sample along
//! its characteristic, and report sample moments with standard errors.
//!
//! Particles are generated in fixed-size blocks. Block `k` draws from the
//! ChaCha stream `k` of the master seed, so the set of particles, and every
//! reported bit, is independent of how many worker threads are used.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{hamilton_flow, IntegratorConfig};
use crate::error::{invalid, Result};
use crate::phase_space::{GaussianState, Hamiltonian, MomentState, PhasePoint};

const BLOCK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub t: f64,
    pub moments: MomentState,
    /// Standard error of each entry of `moments`.
    pub std_errors: MomentState,
    pub n: usize,
    pub seed: u64,
}

/// Sample moments (with `1/n` normalization) and their standard errors.
pub fn sample_moments(points: &[PhasePoint]) -> (MomentState, MomentState) {
    let n = points.len() as f64;
    let mean_q = points.iter().map(|z| z.q).sum::<f64>() / n;
    let mean_p = points.iter().map(|z| z.p).sum::<f64>() / n;
    let (mut vq, mut vp, mut c) = (0.0, 0.0, 0.0);
    let (mut q4, mut p4, mut c2) = (0.0, 0.0, 0.0);
    for z in points {
        let dq = z.q - mean_q;
        let dp = z.p - mean_p;
        let (dq2, dp2) = (dq * dq, dp * dp);
        vq += dq2;
        vp += dp2;
        c += dq * dp;
        q4 += dq2 * dq2;
        p4 += dp2 * dp2;
        c2 += dq2 * dp2;
    }
    let (var_q, var_p, cov_qp) = (vq / n, vp / n, c / n);
    let moments = MomentState {
        mean_q,
        mean_p,
        var_q,
        var_p,
        cov_qp,
    };
    let se = |x: f64| (x.max(0.0) / n).sqrt();
    let errors = MomentState {
        mean_q: se(var_q),
        mean_p: se(var_p),
        var_q: se(q4 / n - var_q * var_q),
        var_p: se(p4 / n - var_p * var_p),
        cov_qp: se(c2 / n - cov_qp * cov_qp),
    };
    (moments, errors)
}

/// Ensemble moments at a single time `t`.
pub fn ensemble_evolve(
    s: &GaussianState,
    h: &Hamiltonian,
    t: f64,
    n: usize,
    seed: u64,
    cfg: &IntegratorConfig,
    shards: usize,
) -> Result<EnsembleResult> {
    let mut out = ensemble_trajectory(s, h, &[t], n, seed, cfg, shards)?;
    Ok(out.remove(0))
}

/// Ensemble moments at each of the nondecreasing `times`, following the
/// same particles throughout.
pub fn ensemble_trajectory(
    s: &GaussianState,
    h: &Hamiltonian,
    times: &[f64],
    n: usize,
    seed: u64,
    cfg: &IntegratorConfig,
    shards: usize,
) -> Result<Vec<EnsembleResult>> {
    if n < 100 {
        return Err(invalid("n", format!("at least 100 particles required, got {n}")));
    }
    if shards == 0 {
        return Err(invalid("shards", "must be at least 1"));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("times", "must be finite and nondecreasing"));
    }

    let blocks = n.div_ceil(BLOCK);
    let run_block = |b: usize| -> Vec<Vec<PhasePoint>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let len = BLOCK.min(n - b * BLOCK);
        let (sq, sp) = (s.a() / 2f64.sqrt(), s.b() / 2f64.sqrt());
        let mut current: Vec<PhasePoint> = (0..len)
            .map(|_| {
                let zq: f64 = StandardNormal.sample(&mut rng);
                let zp: f64 = StandardNormal.sample(&mut rng);
                PhasePoint::new(s.q0() + sq * zq, s.p0() + sp * zp)
            })
            .collect();
        let mut snapshots = Vec::with_capacity(times.len());
        let mut t_prev = 0.0;
        for &t in times {
            let span = t - t_prev;
            if span != 0.0 {
                for z in current.iter_mut() {
                    *z = hamilton_flow(*z, h, span, cfg);
                }
            }
            snapshots.push(current.clone());
            t_prev = t;
        }
        snapshots
    };

    let per_block: Vec<Vec<Vec<PhasePoint>>> = if shards == 1 {
        (0..blocks).map(run_block).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(shards)
            .build()
            .map_err(|e| invalid("shards", e.to_string()))?;
        pool.install(|| (0..blocks).into_par_iter().map(run_block).collect())
    };

    let results = times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let points: Vec<PhasePoint> = per_block.iter().flat_map(|b| b[k].iter().copied()).collect();
            let (moments, std_errors) = sample_moments(&points);
            EnsembleResult {
                t,
                moments,
                std_errors,
                n,
                seed,
            }
        })
        .collect();
    Ok(results)
}
