//! A free Gaussian packet spreads: the position variance grows as
//! `(a^2 + b^2 t^2 / m^2) / 2` while the momentum distribution is unchanged.
//!
//!     cargo run --release --example free_delocalization [-- n]

use liouville::dynamics::{analytic_gaussian_free, Evolver, SolverConfig};
use liouville::{GaussianState, GridDensity, GridSpec, Hamiltonian};

fn main() -> liouville::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(256);
    let s = GaussianState::new(0.0, 1.0, 1.0, 1.0)?;
    let h = Hamiltonian::free(1.0)?;
    let grid = GridDensity::from_gaussian(&s, GridSpec::square(12.0, n)?)?;
    let mut ev = Evolver::new(grid, &h, SolverConfig::default())?;

    println!("{:>5} {:>12} {:>12} {:>12} {:>12}", "t", "var_q grid", "var_q exact", "cov grid", "mass");
    for k in 0..=8 {
        let t = 0.25 * k as f64;
        ev.advance_to(t)?;
        let m = ev.density().moments();
        let exact = analytic_gaussian_free(&s, h.mass(), t)?;
        println!(
            "{t:>5.2} {:>12.8} {:>12.8} {:>12.8} {:>12.3e}",
            m.var_q,
            exact.var_q,
            m.cov_qp,
            ev.cumulative_mass() - 1.0
        );
    }
    Ok(())
}
