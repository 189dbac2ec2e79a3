//! The centre of a packet does not follow Newton's trajectory when the
//! force is nonlinear: the width feeds back into the mean through
//! `V'''`. The closed moment equations predict the correction; a large
//! particle ensemble checks it.
//!
//!     cargo run --release --example newton_corrections

use liouville::dynamics::{ensemble_trajectory, IntegratorConfig, Scheme};
use liouville::moments::{evolve_moments, newton_trajectory};
use liouville::{GaussianState, Hamiltonian, Potential};

fn main() -> liouville::Result<()> {
    let h = Hamiltonian::new(1.0, Potential::quartic(1.0))?;
    let dt = 1e-3;
    let times = [0.25, 0.5, 1.0, 1.5];
    let integrator = IntegratorConfig::new(dt, Scheme::Rk4)?;

    for width in [0.4, 0.2, 0.1] {
        let s = GaussianState::new(1.0, 0.0, width, width)?;
        let closure = evolve_moments(&s.moments(), &h, 1.5, dt)?;
        let newton = newton_trajectory(s.center(), &h, 1.5, dt)?;
        let ens = ensemble_trajectory(&s, &h, &times, 200_000, 1, &integrator, 1)?;
        println!("a = b = {width}");
        for (t, r) in times.iter().zip(&ens) {
            let k = (t / dt).round() as usize;
            let q_newton = newton.samples[k].1.q;
            println!(
                "  t = {t:<4} closure {:+.3e}  ensemble {:+.3e} +/- {:.1e}",
                closure.samples[k].1.mean_q - q_newton,
                r.moments.mean_q - q_newton,
                r.std_errors.mean_q
            );
        }
    }
    Ok(())
}
