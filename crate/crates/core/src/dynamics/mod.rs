//! Time evolution along Hamilton's characteristics.
//!
//! The characteristics of the single-particle Liouville equation are
//! Hamilton's equations `q' = p/m`, `p' = -V'(q)`. Everything in this module
//! is built on top of [`hamilton_step`]: the grid solver traces them
//! backward, the ensemble oracle pushes samples forward.

mod analytic;
mod ensemble;
mod solver;

pub use analytic::{analytic_gaussian_free, analytic_gaussian_linear, linear_flow_matrix};
pub use ensemble::{ensemble_evolve, ensemble_trajectory, sample_moments, EnsembleResult};
pub use solver::{evolve_semilagrangian, Evolution, Evolver, SolverConfig, StepDiagnostics};

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::phase_space::{Hamiltonian, PhasePoint};

/// Time-stepping scheme for Hamilton's equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Kick-drift-kick velocity Verlet: symplectic and time-reversible.
    #[default]
    Leapfrog,
    /// Classical fourth-order Runge-Kutta.
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    dt: f64,
    scheme: Scheme,
}

impl IntegratorConfig {
    pub fn new(dt: f64, scheme: Scheme) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("time step must be > 0, got {dt}")));
        }
        Ok(Self { dt, scheme })
    }

    pub fn leapfrog(dt: f64) -> Result<Self> {
        Self::new(dt, Scheme::Leapfrog)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Returns a message when `dt` exceeds a tenth of the oscillation period
    /// of a confining quadratic potential.
    pub fn stability_warning(&self, h: &Hamiltonian) -> Option<String> {
        let c = h.potential().coefficients();
        if h.potential().degree() != 2 || c[2] <= 0.0 {
            return None;
        }
        let period = 2.0 * PI * (h.mass() / (2.0 * c[2])).sqrt();
        (self.dt > 0.1 * period).then(|| {
            format!(
                "dt = {} exceeds 0.1 x oscillation period ({:.4})",
                self.dt, period
            )
        })
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            scheme: Scheme::Leapfrog,
        }
    }
}

/// One step of Hamilton's equations. `dt` may be negative.
#[inline]
pub fn hamilton_step(z: PhasePoint, h: &Hamiltonian, dt: f64, scheme: Scheme) -> PhasePoint {
    let m = h.mass();
    match scheme {
        Scheme::Leapfrog => {
            let half = 0.5 * dt;
            let p_half = z.p + half * h.force(z.q);
            let q = z.q + dt * p_half / m;
            let p = p_half + half * h.force(q);
            PhasePoint::new(q, p)
        }
        Scheme::Rk4 => {
            let f = |q: f64, p: f64| (p / m, h.force(q));
            let (k1q, k1p) = f(z.q, z.p);
            let (k2q, k2p) = f(z.q + 0.5 * dt * k1q, z.p + 0.5 * dt * k1p);
            let (k3q, k3p) = f(z.q + 0.5 * dt * k2q, z.p + 0.5 * dt * k2p);
            let (k4q, k4p) = f(z.q + dt * k3q, z.p + dt * k3p);
            PhasePoint::new(
                z.q + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
                z.p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
            )
        }
    }
}

/// Splits a horizon `|t|` into whole steps of `dt` plus a remainder.
pub(crate) fn step_plan(t: f64, dt: f64) -> (usize, f64) {
    let t = t.abs();
    let n = (t / dt + 1e-9).floor();
    let rem = (t - n * dt).max(0.0);
    if rem <= 1e-12 * dt {
        (n as usize, 0.0)
    } else {
        (n as usize, rem)
    }
}

/// Flows `z` for time `t` using whole steps of `cfg.dt()` and one exact
/// partial step.
///
/// Negative `t` flows backward. The partial step comes last going forward
/// and first going backward, so with the leapfrog scheme
/// `hamilton_flow(hamilton_flow(z, t), -t)` returns `z` up to rounding.
pub fn hamilton_flow(z: PhasePoint, h: &Hamiltonian, t: f64, cfg: &IntegratorConfig) -> PhasePoint {
    let (n, rem) = step_plan(t, cfg.dt);
    let sign = if t < 0.0 { -1.0 } else { 1.0 };
    let dt = sign * cfg.dt;
    let mut z = z;
    if sign < 0.0 && rem > 0.0 {
        z = hamilton_step(z, h, -rem, cfg.scheme);
    }
    for _ in 0..n {
        z = hamilton_step(z, h, dt, cfg.scheme);
    }
    if sign > 0.0 && rem > 0.0 {
        z = hamilton_step(z, h, rem, cfg.scheme);
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::Potential;

    fn harmonic() -> Hamiltonian {
        Hamiltonian::new(1.0, Potential::harmonic(1.0)).unwrap()
    }

    #[test]
    fn free_step_is_exact() {
        let h = Hamiltonian::free(1.0).unwrap();
        for scheme in [Scheme::Leapfrog, Scheme::Rk4] {
            let z = hamilton_step(PhasePoint::new(0.0, 1.0), &h, 0.5, scheme);
            assert_eq!(z, PhasePoint::new(0.5, 1.0));
        }
    }

    #[test]
    fn leapfrog_step_reverses() {
        let h = harmonic();
        let z0 = PhasePoint::new(0.7, -0.3);
        let z1 = hamilton_step(z0, &h, 0.01, Scheme::Leapfrog);
        let back = hamilton_step(z1, &h, -0.01, Scheme::Leapfrog);
        assert!((back.q - z0.q).abs() < 1e-14 && (back.p - z0.p).abs() < 1e-14);
    }

    #[test]
    fn harmonic_period_returns() {
        // Closed form: q(t) = q0 cos t + p0 sin t, periodic with 2 pi.
        let h = harmonic();
        let z0 = PhasePoint::new(1.0, 0.5);
        for scheme in [Scheme::Leapfrog, Scheme::Rk4] {
            let cfg = IntegratorConfig::new(1e-3, scheme).unwrap();
            let z = hamilton_flow(z0, &h, 2.0 * PI, &cfg);
            assert!((z.q - z0.q).abs() < 1e-5, "{scheme:?}: {z:?}");
            assert!((z.p - z0.p).abs() < 1e-5, "{scheme:?}: {z:?}");
        }
    }

    #[test]
    fn free_flow_matches_straight_line() {
        let h = Hamiltonian::free(2.0).unwrap();
        let cfg = IntegratorConfig::leapfrog(0.1).unwrap();
        let z = hamilton_flow(PhasePoint::new(1.0, 3.0), &h, 1.25, &cfg);
        assert!((z.q - (1.0 + 3.0 * 1.25 / 2.0)).abs() < 1e-13);
        assert_eq!(z.p, 3.0);
    }

    #[test]
    fn quartic_energy_drift_is_small() {
        let h = Hamiltonian::new(1.0, Potential::quartic(1.0)).unwrap();
        let cfg = IntegratorConfig::leapfrog(1e-3).unwrap();
        for z0 in [PhasePoint::new(1.0, 0.0), PhasePoint::new(-0.5, 0.8), PhasePoint::new(0.2, -1.1)] {
            let e0 = h.energy(z0);
            let mut z = z0;
            for _ in 0..10 {
                z = hamilton_flow(z, &h, 1.0, &cfg);
                assert!((h.energy(z) - e0).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn flow_reverses_with_partial_step() {
        let h = Hamiltonian::new(1.0, Potential::quartic(1.0)).unwrap();
        let cfg = IntegratorConfig::leapfrog(1e-3).unwrap();
        let z0 = PhasePoint::new(0.9, 0.4);
        let t = 1.23456;
        let back = hamilton_flow(hamilton_flow(z0, &h, t, &cfg), &h, -t, &cfg);
        assert!((back.q - z0.q).abs() < 1e-10 && (back.p - z0.p).abs() < 1e-10);
    }

    #[test]
    fn step_plan_handles_exact_multiples() {
        assert_eq!(step_plan(2.0, 1e-3), (2000, 0.0));
        let (n, rem) = step_plan(0.0105, 1e-3);
        assert_eq!(n, 10);
        assert!((rem - 5e-4).abs() < 1e-15);
        assert_eq!(step_plan(0.0, 1e-3), (0, 0.0));
    }

    #[test]
    fn stability_warning_for_coarse_steps() {
        let h = harmonic();
        assert!(IntegratorConfig::leapfrog(1.0).unwrap().stability_warning(&h).is_some());
        assert!(IntegratorConfig::leapfrog(0.01).unwrap().stability_warning(&h).is_none());
        assert!(IntegratorConfig::new(0.0, Scheme::Rk4).is_err());
    }
}
