//! Command-line front end for scenario files.
//!
//! Exit status: 0 success, 2 configuration error, 3 numerical failure,
//! 4 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use liouville::scenario::{parse_config, render_config, run_scenario, ScenarioConfig, ScenarioError, ScenarioKind};

#[derive(Parser, Debug)]
#[command(name = "liouville", version, about = "Phase-space density evolution and measurement reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (TOML).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed, overriding `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the resolved configuration and per-file progress.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Grid evolution of a Gaussian state.
    Evolve,
    /// Closed moment equations against the point trajectory.
    Moments,
    /// Monte Carlo ensemble moments.
    Ensemble,
    /// Simulated measurements and their reconstruction.
    Measure,
    /// Interval probability convergence with sample size.
    Converge,
    /// Measured position plus momentum model, then grid evolution.
    Compose,
    /// Check the scenario file and print it with defaults filled in.
    Validate,
}

impl Command {
    fn kind(self) -> Option<ScenarioKind> {
        match self {
            Command::Evolve => Some(ScenarioKind::Evolve),
            Command::Moments => Some(ScenarioKind::Moments),
            Command::Ensemble => Some(ScenarioKind::Ensemble),
            Command::Measure => Some(ScenarioKind::Measure),
            Command::Converge => Some(ScenarioKind::Converge),
            Command::Compose => Some(ScenarioKind::Compose),
            Command::Validate => None,
        }
    }
}

fn load(cli: &Cli) -> Result<ScenarioConfig, ScenarioError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| ScenarioError::Config("--config <PATH> is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.clone(),
        source: e,
    })?;
    let mut cfg = parse_config(&text).map_err(|e| match e {
        ScenarioError::Config(msg) => ScenarioError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), ScenarioError> {
    let cfg = load(cli)?;
    let Some(kind) = cli.command.kind() else {
        print!("{}", render_config(&cfg)?);
        return Ok(());
    };
    if kind != cfg.kind {
        return Err(ScenarioError::Config(format!(
            "subcommand `{}` does not match scenario kind `{}`",
            kind.name(),
            cfg.kind.name()
        )));
    }
    if cli.verbose > 0 {
        eprint!("{}", render_config(&cfg)?);
    }
    let report = run_scenario(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for f in &report.files {
        println!("{}", f.display());
    }
    if cli.verbose > 0 {
        if let Some(m) = report.final_mass {
            eprintln!("final mass ratio: {m}");
        }
        eprintln!("max residual: {:e}", report.max_residual);
        eprintln!("elapsed: {:.3} s", report.elapsed.as_secs_f64());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
