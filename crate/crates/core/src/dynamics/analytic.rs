//! Closed-form Gaussian propagation for potentials of degree at most two.

use crate::error::{invalid, Error, Result};
use crate::phase_space::{GaussianState, Hamiltonian, MomentState};

/// Moments of a Gaussian state after free motion for time `t`.
pub fn analytic_gaussian_free(s: &GaussianState, mass: f64, t: f64) -> Result<MomentState> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(invalid("mass", format!("must be > 0, got {mass}")));
    }
    let (a2, b2) = (s.a() * s.a(), s.b() * s.b());
    Ok(MomentState {
        mean_q: s.q0() + s.p0() * t / mass,
        mean_p: s.p0(),
        var_q: 0.5 * (a2 + b2 * t * t / (mass * mass)),
        var_p: 0.5 * b2,
        cov_qp: 0.5 * b2 * t / mass,
    })
}

/// Flow of a linear force `F(q) = -k q - c1`: returns the 2x2 matrix `M`
/// and the equilibrium `q_e` such that `(q - q_e, p)` evolves as
/// `M (q0 - q_e, p0)`. For `k == 0` the equilibrium is undefined and
/// `q_e` is returned as zero; the constant force then enters through
/// [`analytic_gaussian_linear`].
pub fn linear_flow_matrix(h: &Hamiltonian, t: f64) -> Result<([[f64; 2]; 2], f64)> {
    let pot = h.potential();
    if pot.degree() > 2 {
        return Err(Error::NonlinearPotential(pot.degree()));
    }
    let c = pot.coefficients();
    let c1 = c.get(1).copied().unwrap_or(0.0);
    let k = 2.0 * c.get(2).copied().unwrap_or(0.0);
    let m = h.mass();
    if k > 0.0 {
        let w = (k / m).sqrt();
        let (s, co) = (w * t).sin_cos();
        Ok(([[co, s / (m * w)], [-m * w * s, co]], -c1 / k))
    } else if k < 0.0 {
        let w = (-k / m).sqrt();
        let (s, co) = ((w * t).sinh(), (w * t).cosh());
        Ok(([[co, s / (m * w)], [m * w * s, co]], -c1 / k))
    } else {
        Ok(([[1.0, t / m], [0.0, 1.0]], 0.0))
    }
}

/// Exact pushforward of the Gaussian's mean and covariance through the
/// linear Hamiltonian flow of a potential with degree at most two.
pub fn analytic_gaussian_linear(s: &GaussianState, h: &Hamiltonian, t: f64) -> Result<MomentState> {
    let pot = h.potential();
    if pot.degree() > 2 {
        return Err(Error::NonlinearPotential(pot.degree()));
    }
    let c = pot.coefficients();
    let c1 = c.get(1).copied().unwrap_or(0.0);
    let k = 2.0 * c.get(2).copied().unwrap_or(0.0);
    if k == 0.0 && c1 == 0.0 {
        return analytic_gaussian_free(s, h.mass(), t);
    }

    let (mat, q_e) = linear_flow_matrix(h, t)?;
    let m = h.mass();
    let (mean_q, mean_p) = if k == 0.0 {
        (
            s.q0() + s.p0() * t / m - 0.5 * c1 * t * t / m,
            s.p0() - c1 * t,
        )
    } else {
        let dq = s.q0() - q_e;
        (
            q_e + mat[0][0] * dq + mat[0][1] * s.p0(),
            mat[1][0] * dq + mat[1][1] * s.p0(),
        )
    };

    let m0 = s.moments();
    let (vq, vp) = (m0.var_q, m0.var_p);
    Ok(MomentState {
        mean_q,
        mean_p,
        var_q: mat[0][0] * mat[0][0] * vq + mat[0][1] * mat[0][1] * vp,
        var_p: mat[1][0] * mat[1][0] * vq + mat[1][1] * mat[1][1] * vp,
        cov_qp: mat[0][0] * mat[1][0] * vq + mat[0][1] * mat[1][1] * vp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::Potential;
    use std::f64::consts::PI;

    #[test]
    fn free_motion_moments() {
        let s = GaussianState::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let m = analytic_gaussian_free(&s, 1.0, 2.0).unwrap();
        assert_eq!(m.mean_q, 2.0);
        assert_eq!(m.mean_p, 1.0);
        assert_eq!(m.var_q, 2.5);
        assert_eq!(analytic_gaussian_free(&s, 1.0, 0.0).unwrap(), s.moments());
        assert!(analytic_gaussian_free(&s, 0.0, 1.0).is_err());
    }

    #[test]
    fn linear_reduces_to_free() {
        let s = GaussianState::new(0.4, -0.3, 0.8, 1.2).unwrap();
        let h = Hamiltonian::free(1.5).unwrap();
        assert_eq!(
            analytic_gaussian_linear(&s, &h, 1.7).unwrap(),
            analytic_gaussian_free(&s, 1.5, 1.7).unwrap()
        );
    }

    #[test]
    fn harmonic_period_recurs() {
        let s = GaussianState::new(1.0, 0.5, 0.6, 1.4).unwrap();
        let h = Hamiltonian::new(1.0, Potential::harmonic(1.0)).unwrap();
        let m = analytic_gaussian_linear(&s, &h, 2.0 * PI).unwrap();
        for (x, y) in m.as_array().iter().zip(s.moments().as_array()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn quarter_period_swaps_widths() {
        // Rotation by -pi/2 maps diag(a^2/2, b^2/2) to diag(b^2/2, a^2/2).
        let s = GaussianState::new(0.0, 0.0, 0.5, 2.0).unwrap();
        let h = Hamiltonian::new(1.0, Potential::harmonic(1.0)).unwrap();
        let m = analytic_gaussian_linear(&s, &h, 0.5 * PI).unwrap();
        assert!((m.var_q - 2.0).abs() < 1e-12);
        assert!((m.var_p - 0.125).abs() < 1e-12);
        assert!(m.cov_qp.abs() < 1e-12);
    }

    #[test]
    fn constant_force_and_shifted_well() {
        let s = GaussianState::new(0.0, 1.0, 1.0, 1.0).unwrap();
        // V = 2 q: uniform acceleration -2.
        let h = Hamiltonian::new(1.0, Potential::new(vec![0.0, 2.0]).unwrap()).unwrap();
        let m = analytic_gaussian_linear(&s, &h, 1.0).unwrap();
        assert!((m.mean_q - 0.0).abs() < 1e-15);
        assert!((m.mean_p + 1.0).abs() < 1e-15);

        // V = (q - 1)^2 / 2 = q^2/2 - q + 1/2: oscillation about q = 1.
        let h = Hamiltonian::new(1.0, Potential::new(vec![0.5, -1.0, 0.5]).unwrap()).unwrap();
        let m = analytic_gaussian_linear(&s, &h, PI).unwrap();
        assert!((m.mean_q - 2.0).abs() < 1e-12);
        assert!((m.mean_p + 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverted_well_preserves_phase_volume() {
        let s = GaussianState::new(0.1, 0.0, 0.3, 0.3).unwrap();
        let h = Hamiltonian::new(2.0, Potential::harmonic(-1.0)).unwrap();
        let m = analytic_gaussian_linear(&s, &h, 1.3).unwrap();
        let det0 = s.moments().var_q * s.moments().var_p;
        assert!(((m.var_q * m.var_p - m.cov_qp * m.cov_qp) - det0).abs() < 1e-12);
    }

    #[test]
    fn nonlinear_potential_is_rejected() {
        let s = GaussianState::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let h = Hamiltonian::new(1.0, Potential::quartic(1.0)).unwrap();
        assert_eq!(
            analytic_gaussian_linear(&s, &h, 1.0),
            Err(Error::NonlinearPotential(4))
        );
    }
}
