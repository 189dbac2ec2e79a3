//! As the sample size grows, interval probabilities under the finite-`n`
//! reconstruction approach those under the limiting density. Direct
//! instrument readings do not: they keep the random scatter.
//!
//!     cargo run --release --example interval_convergence

use liouville::measurement::{convergence_experiment, ConvergenceSettings, LatticeInterval, MeasurementDevice, RationalStep};

fn main() -> liouville::Result<()> {
    let step = RationalStep::new(1, 20)?;
    let dev = MeasurementDevice::with_drawn_offset(step, 0.2, 0.5, 8)?;
    let iv = LatticeInterval::from_indices(step, -4, 5)?;
    let settings = ConvergenceSettings {
        n_schedule: vec![10, 100, 1_000, 10_000, 100_000],
        trials: 4,
        fresh_draws: 100_000,
        seed: 8,
    };
    let rep = convergence_experiment(&dev, 0.0, &settings, &iv)?;
    println!("interval [{}, {}]", iv.a(), iv.b());
    println!("{:>7} {:>10} {:>10} {:>10} {:>10} {:>11}", "n", "limit", "frequency", "gap", "error bar", "device gap");
    for r in &rep.rows {
        println!(
            "{:>7} {:>10.5} {:>10.5} {:>10.2e} {:>10.1e} {:>11.3e}",
            r.n, r.limit_probability, r.frequency, r.gap, r.error_bar, r.device_gap
        );
    }
    println!("non-increasing within 3 error bars: {}", rep.is_non_increasing(3.0));
    Ok(())
}
