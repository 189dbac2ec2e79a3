//! Readings on a fixed lattice, the estimates built from them, and the two
//! reconstructions of the measured quantity: `N(X̄, S^2)` for finite `n`
//! and its limit `N(X̄, sigma_syst^2)`.
//!
//!     cargo run --release --example measurement_reconstruction

use liouville::measurement::{estimate, rho_infinity, sample_measurements, MeasurementDevice, RationalStep};

fn main() -> liouville::Result<()> {
    let step: RationalStep = "1/20".parse()?;
    let dev = MeasurementDevice::with_drawn_offset(step, 0.2, 0.5, 3)?;
    let x_true = 1.0;
    println!(
        "step {step}, sigma_syst {}, sigma_rand {}, drawn offset {:+.4}",
        dev.sigma_syst(),
        dev.sigma_rand(),
        dev.systematic_offset()
    );

    for n in [10, 100, 1_000, 10_000, 100_000] {
        let samples = sample_measurements(&dev, x_true, n, 3)?;
        let est = estimate(&samples, dev.sigma_syst())?;
        let limit = rho_infinity(est.mean_est, dev.sigma_syst())?;
        println!(
            "n = {n:>6}: mean {:.5}  S_rand^2 {:.5}  S^2 {:.6}  P(|x - 1| < 0.1): finite {:.4}, limit {:.4}",
            est.mean_est,
            est.s2_rand,
            est.s2_total,
            est.density.mass_between(0.9, 1.1),
            limit.mass_between(0.9, 1.1)
        );
    }
    Ok(())
}
