//! Gaussian moment closure of the Liouville dynamics.
//!
//! Taking moments of the Liouville equation gives an open hierarchy: the
//! mean force `<V'(q)>` depends on every central moment of `q`. Setting the
//! third and higher cumulants to zero and expanding around `q̄` closes it at
//! second order:
//!
//! ```text
//! d q̄/dt      = p̄ / m
//! d p̄/dt      = -( V'(q̄) + V'''(q̄) var_q / 2 )
//! d var_q/dt  = 2 cov / m
//! d cov/dt    = var_p / m - V''(q̄) var_q
//! d var_p/dt  = -2 V''(q̄) cov
//! ```
//!
//! The `V'''` term is the leading correction to Newton's equation for the
//! mean. It vanishes for potentials of degree two or less, where the closure
//! is exact and the mean follows the Newtonian trajectory.

use crate::dynamics::{hamilton_step, step_plan, Scheme};
use crate::error::{invalid, Error, Result};
use crate::phase_space::{GaussianState, Hamiltonian, MomentState, PhasePoint};

/// Highest potential degree the closure accepts.
pub const MAX_CLOSURE_DEGREE: usize = 4;

/// Tolerance on `cov^2 - var_q var_p` before the closure is declared broken.
pub const COVARIANCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTrajectory {
    pub samples: Vec<(f64, MomentState)>,
}

impl MomentTrajectory {
    pub fn last(&self) -> &(f64, MomentState) {
        self.samples.last().expect("trajectory holds the initial state")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonTrajectory {
    pub samples: Vec<(f64, PhasePoint)>,
}

impl NewtonTrajectory {
    pub fn last(&self) -> &(f64, PhasePoint) {
        self.samples.last().expect("trajectory holds the initial point")
    }
}

/// Time derivative of the moments under Gaussian closure.
pub fn moment_rhs(ms: &MomentState, h: &Hamiltonian) -> Result<MomentState> {
    let pot = h.potential();
    if pot.degree() > MAX_CLOSURE_DEGREE {
        return Err(Error::DegreeTooHigh {
            degree: pot.degree(),
            max: MAX_CLOSURE_DEGREE,
        });
    }
    let q = ms.mean_q;
    let v1 = pot.derivative(q, 1)?;
    let v2 = pot.derivative(q, 2)?;
    let v3 = pot.derivative(q, 3)?;
    let m = h.mass();
    Ok(MomentState {
        mean_q: ms.mean_p / m,
        mean_p: -(v1 + 0.5 * v3 * ms.var_q),
        var_q: 2.0 * ms.cov_qp / m,
        var_p: -2.0 * v2 * ms.cov_qp,
        cov_qp: ms.var_p / m - v2 * ms.var_q,
    })
}

fn axpy(base: &MomentState, k: f64, d: &MomentState) -> MomentState {
    MomentState {
        mean_q: base.mean_q + k * d.mean_q,
        mean_p: base.mean_p + k * d.mean_p,
        var_q: base.var_q + k * d.var_q,
        var_p: base.var_p + k * d.var_p,
        cov_qp: base.cov_qp + k * d.cov_qp,
    }
}

fn rk4_step(ms: &MomentState, h: &Hamiltonian, dt: f64) -> Result<MomentState> {
    let k1 = moment_rhs(ms, h)?;
    let k2 = moment_rhs(&axpy(ms, 0.5 * dt, &k1), h)?;
    let k3 = moment_rhs(&axpy(ms, 0.5 * dt, &k2), h)?;
    let k4 = moment_rhs(&axpy(ms, dt, &k3), h)?;
    let combine = |a: f64, b: f64, c: f64, d: f64| (a + 2.0 * b + 2.0 * c + d) / 6.0;
    let slope = MomentState {
        mean_q: combine(k1.mean_q, k2.mean_q, k3.mean_q, k4.mean_q),
        mean_p: combine(k1.mean_p, k2.mean_p, k3.mean_p, k4.mean_p),
        var_q: combine(k1.var_q, k2.var_q, k3.var_q, k4.var_q),
        var_p: combine(k1.var_p, k2.var_p, k3.var_p, k4.var_p),
        cov_qp: combine(k1.cov_qp, k2.cov_qp, k3.cov_qp, k4.cov_qp),
    };
    Ok(axpy(ms, dt, &slope))
}

/// Step sizes and end times: whole steps of `dt`, then the remainder.
fn schedule(t: f64, dt: f64) -> Result<Vec<(f64, f64)>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", format!("must be > 0, got {dt}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    let (n, rem) = step_plan(t, dt);
    let mut steps: Vec<(f64, f64)> = (1..=n).map(|k| (dt, k as f64 * dt)).collect();
    if rem > 0.0 {
        steps.push((rem, t));
    } else if let Some(last) = steps.last_mut() {
        last.1 = t;
    }
    Ok(steps)
}

/// RK4 integration of the closed moment equations, sampled every step.
pub fn evolve_moments(
    ms0: &MomentState,
    h: &Hamiltonian,
    t: f64,
    dt: f64,
) -> Result<MomentTrajectory> {
    let steps = schedule(t, dt)?;
    let mut samples = Vec::with_capacity(steps.len() + 1);
    let mut ms = *ms0;
    samples.push((0.0, ms));
    for (h_step, t_end) in steps {
        ms = rk4_step(&ms, h, h_step)?;
        let excess = ms.covariance_excess();
        if excess > COVARIANCE_TOLERANCE || !excess.is_finite() {
            return Err(Error::ClosureBreakdown { t: t_end, excess });
        }
        samples.push((t_end, ms));
    }
    Ok(MomentTrajectory { samples })
}

/// The point trajectory from `z0`, integrated with RK4 on the same time
/// samples as [`evolve_moments`].
pub fn newton_trajectory(
    z0: PhasePoint,
    h: &Hamiltonian,
    t: f64,
    dt: f64,
) -> Result<NewtonTrajectory> {
    let steps = schedule(t, dt)?;
    let mut samples = Vec::with_capacity(steps.len() + 1);
    let mut z = z0;
    samples.push((0.0, z));
    for (h_step, t_end) in steps {
        z = hamilton_step(z, h, h_step, Scheme::Rk4);
        samples.push((t_end, z));
    }
    Ok(NewtonTrajectory { samples })
}

/// `(t, q̄_closure(t) - q_Newton(t))` for a Gaussian initial state; the
/// Newtonian trajectory starts at the state's centre.
pub fn newton_correction(
    s: &GaussianState,
    h: &Hamiltonian,
    t: f64,
    dt: f64,
) -> Result<Vec<(f64, f64)>> {
    let closure = evolve_moments(&s.moments(), h, t, dt)?;
    let newton = newton_trajectory(s.center(), h, t, dt)?;
    Ok(closure
        .samples
        .iter()
        .zip(&newton.samples)
        .map(|((t, ms), (_, z))| (*t, ms.mean_q - z.q))
        .collect())
}
