//! In a harmonic well the flow is a rigid rotation of phase space, so after
//! one period the density returns to where it started. The L1 distance
//! measures how much the grid has smeared it on the way round.
//!
//!     cargo run --release --example harmonic_recurrence [-- n dt]

use std::f64::consts::PI;

use liouville::dynamics::{analytic_gaussian_linear, Evolver, IntegratorConfig, SolverConfig};
use liouville::{GaussianState, GridDensity, GridSpec, Hamiltonian, Potential};

fn main() -> liouville::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(256);
    let dt: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1e-2);

    let s = GaussianState::new(2.0, 0.0, 1.0, 1.0)?;
    let h = Hamiltonian::new(1.0, Potential::harmonic(1.0))?;
    let d0 = GridDensity::from_gaussian(&s, GridSpec::square(12.0, n)?)?;
    let cfg = SolverConfig::default().with_integrator(IntegratorConfig::leapfrog(dt)?);
    let mut ev = Evolver::new(d0.clone(), &h, cfg)?;

    for quarter in 1..=4 {
        let t = 0.5 * PI * quarter as f64;
        ev.advance_to(t)?;
        let m = ev.density().moments();
        let exact = analytic_gaussian_linear(&s, &h, t)?;
        println!(
            "t = {quarter}/4 period: mean ({:+.5}, {:+.5}) exact ({:+.5}, {:+.5})",
            m.mean_q, m.mean_p, exact.mean_q, exact.mean_p
        );
    }
    println!("L1 distance after one period: {:.3e}", ev.density().l1_distance(&d0)?);
    Ok(())
}
