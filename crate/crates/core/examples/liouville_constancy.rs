//! The density is constant along trajectories: the value the grid holds at
//! `Phi_t(z)` should equal the initial density at `z`, even in an
//! anharmonic well where the packet shears into a spiral.
//!
//!     cargo run --release --example liouville_constancy

use liouville::dynamics::{hamilton_flow, Evolver, IntegratorConfig, SolverConfig};
use liouville::{GaussianState, GridDensity, GridSpec, Hamiltonian, Interpolation, PhasePoint, Potential};

fn main() -> liouville::Result<()> {
    let s = GaussianState::new(1.0, 0.0, 0.5, 0.5)?;
    let h = Hamiltonian::new(1.0, Potential::quartic(1.0))?;
    let integrator = IntegratorConfig::leapfrog(1e-2)?;
    let grid = GridDensity::from_gaussian(&s, GridSpec::square(5.0, 384)?)?;
    let mut ev = Evolver::new(grid, &h, SolverConfig::default().with_integrator(integrator))?;

    let probes = [
        PhasePoint::new(1.0, 0.0),
        PhasePoint::new(1.3, 0.2),
        PhasePoint::new(0.6, -0.3),
        PhasePoint::new(1.1, 0.5),
    ];
    for t in [0.5, 1.0, 2.0, 4.0] {
        ev.advance_to(t)?;
        let worst = probes
            .iter()
            .map(|&z| {
                let moved = hamilton_flow(z, &h, t, &integrator);
                let back = hamilton_flow(moved, &h, -t, &integrator);
                let grid = ev.density().sample(moved, Interpolation::CubicClamped);
                ((grid - s.density_at(z)).abs(), (back.q - z.q).abs().max((back.p - z.p).abs()))
            })
            .fold((0.0f64, 0.0f64), |acc, x| (acc.0.max(x.0), acc.1.max(x.1)));
        println!(
            "t = {t:>3}: max |grid(Phi_t z) - rho0(z)| = {:.2e}, max round-trip error = {:.1e}",
            worst.0, worst.1
        );
    }
    Ok(())
}
