//! End to end through the scenario layer: measure a position, attach a
//! momentum model, and evolve the resulting state in a quartic well.
//! Writes CSV tables and SVG plots to the given directory.
//!
//!     cargo run --release --example compose_prediction [-- out_dir]

use liouville::scenario::{parse_config, run_scenario};

const SCENARIO: &str = r#"
kind = "compose"
seed = 12

[hamiltonian]
potential = [0.0, 0.0, 0.0, 0.0, 0.25]

[time]
t_end = 2.0
dt = 5e-3
samples = 20

[grid]
q_min = -3.0
q_max = 3.0
p_min = -3.0
p_max = 3.0
nq = 384
np = 384

[solver]
snapshots = 3

[measurement]
step = "1/50"
sigma_syst = 0.15
sigma_rand = 0.4
x_true = 1.2
samples = 400

[momentum]
mean = 0.0
variance = 0.02
"#;

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "compose_output".to_string());
    let mut cfg = match parse_config(SCENARIO) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    };
    cfg.output_dir = out.into();
    match run_scenario(&cfg) {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            println!(
                "mass drift {:.2e}, {:.2} s",
                report.max_residual,
                report.elapsed.as_secs_f64()
            );
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
