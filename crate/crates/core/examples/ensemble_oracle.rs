//! Grid solver against a particle ensemble in an anharmonic well. The two
//! methods share nothing but the Hamiltonian, so agreement of their moments
//! is an independent check of both.
//!
//!     cargo run --release --example ensemble_oracle

use liouville::dynamics::{ensemble_trajectory, Evolver, IntegratorConfig, SolverConfig};
use liouville::{GaussianState, GridDensity, GridSpec, Hamiltonian, Potential};

fn main() -> liouville::Result<()> {
    let s = GaussianState::new(0.5, 0.5, 0.6, 0.6)?;
    // V = q^2/2 + q^4/4
    let h = Hamiltonian::new(1.0, Potential::new(vec![0.0, 0.0, 0.5, 0.0, 0.25])?)?;
    let integrator = IntegratorConfig::leapfrog(5e-3)?;
    let times = [0.5, 1.0, 2.0, 3.0];

    let ens = ensemble_trajectory(&s, &h, &times, 400_000, 5, &integrator, 1)?;
    let grid = GridDensity::from_gaussian(&s, GridSpec::square(5.0, 256)?)?;
    let mut ev = Evolver::new(grid, &h, SolverConfig::default().with_integrator(integrator))?;

    println!("{:>4} {:>10} {:>10} {:>8} {:>10} {:>10} {:>8}", "t", "var_q", "ensemble", "z", "var_p", "ensemble", "z");
    for (t, r) in times.iter().zip(&ens) {
        ev.advance_to(*t)?;
        let g = ev.density().moments();
        println!(
            "{t:>4} {:>10.6} {:>10.6} {:>8.2} {:>10.6} {:>10.6} {:>8.2}",
            g.var_q,
            r.moments.var_q,
            (g.var_q - r.moments.var_q) / r.std_errors.var_q,
            g.var_p,
            r.moments.var_p,
            (g.var_p - r.moments.var_p) / r.std_errors.var_p
        );
    }
    Ok(())
}
