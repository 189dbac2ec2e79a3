//! Executes a validated scenario and writes its outputs.

use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use super::output::write_records;
use super::{emit_plot, format_float, write_snapshot, PlotSpec, ScenarioConfig, ScenarioError, ScenarioKind, Table};
use crate::dynamics::{ensemble_trajectory, Evolver};
use crate::measurement::{
    cell_probabilities, convergence_experiment, empirical_cell_frequencies, estimate, rho_infinity,
    sample_measurements, window_for, ConvergenceSettings, EstimateResult, MeasurementDevice,
    ReconstructionDensity,
};
use crate::moments::{evolve_moments, newton_trajectory};
use crate::phase_space::{GaussianState, GridDensity};

/// Summary of a completed run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub kind: ScenarioKind,
    /// Files written, in the order they were produced.
    pub files: Vec<PathBuf>,
    pub elapsed: Duration,
    /// Cumulative raw-mass ratio at the end of a grid evolution.
    pub final_mass: Option<f64>,
    /// Largest residual of the invariant the scenario tracks: mass drift
    /// for grid runs, covariance excess for the closure, the variance
    /// identity for measurements and the final gap for convergence.
    pub max_residual: f64,
    pub warnings: Vec<String>,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
    plots: bool,
}

impl Outputs {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn table(&mut self, name: &str, t: &Table) -> Result<(), ScenarioError> {
        let p = self.path(name);
        t.write(&p)
    }

    fn plot(&mut self, name: &str, t: &Table, spec: PlotSpec) -> Result<(), ScenarioError> {
        if !self.plots {
            return Ok(());
        }
        let p = self.path(name);
        emit_plot(t, &spec, &p)
    }
}

/// Runs `cfg`, writing into `cfg.output_dir`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport, ScenarioError> {
    run_inner(cfg).map_err(|e| e.in_scenario(cfg.kind))
}

fn run_inner(cfg: &ScenarioConfig) -> Result<RunReport, ScenarioError> {
    cfg.validate()?;
    let start = Instant::now();
    fs::create_dir_all(&cfg.output_dir).map_err(|e| ScenarioError::io(&cfg.output_dir, e))?;
    let mut out = Outputs {
        dir: cfg.output_dir.clone(),
        files: Vec::new(),
        plots: cfg.plots,
    };
    let mut report = RunReport {
        kind: cfg.kind,
        files: Vec::new(),
        elapsed: Duration::ZERO,
        final_mass: None,
        max_residual: 0.0,
        warnings: Vec::new(),
    };

    match cfg.kind {
        ScenarioKind::Evolve => {
            let state = cfg.initial_state()?;
            run_grid(cfg, &state, &mut out, &mut report)?;
        }
        ScenarioKind::Moments => run_moments(cfg, &mut out, &mut report)?,
        ScenarioKind::Ensemble => run_ensemble(cfg, &mut out, &mut report)?,
        ScenarioKind::Measure => {
            run_measure(cfg, &mut out, &mut report)?;
        }
        ScenarioKind::Converge => run_converge(cfg, &mut out, &mut report)?,
        ScenarioKind::Compose => {
            let est = run_measure(cfg, &mut out, &mut report)?;
            let state = composed_state(cfg, &est)?;
            let mut t = Table::new(&["q0", "p0", "a", "b"]);
            t.push(vec![state.q0(), state.p0(), state.a(), state.b()]);
            out.table("composed_state.csv", &t)?;
            let identity = report.max_residual;
            run_grid(cfg, &state, &mut out, &mut report)?;
            report.max_residual = report.max_residual.max(identity);
        }
    }

    report.files = out.files;
    report.elapsed = start.elapsed();
    Ok(report)
}

/// Position from the reconstruction `N(X̄, S^2)`, momentum from the
/// `[momentum]` section: `a = sqrt(2 S^2)`, `b = sqrt(2 var_p)`.
fn composed_state(cfg: &ScenarioConfig, est: &EstimateResult) -> Result<GaussianState, ScenarioError> {
    let mom = cfg
        .momentum
        .as_ref()
        .ok_or_else(|| ScenarioError::Config("[momentum] compose requires a momentum model".into()))?;
    Ok(GaussianState::new(
        est.mean_est,
        mom.mean,
        (2.0 * est.s2_total).sqrt(),
        (2.0 * mom.variance).sqrt(),
    )?)
}

fn moment_row(t: f64, d: &GridDensity, mass: f64) -> Vec<f64> {
    let m = d.moments();
    vec![t, m.mean_q, m.mean_p, m.var_q, m.var_p, m.cov_qp, mass]
}

fn run_grid(
    cfg: &ScenarioConfig,
    state: &GaussianState,
    out: &mut Outputs,
    report: &mut RunReport,
) -> Result<(), ScenarioError> {
    let h = cfg.hamiltonian()?;
    let solver = cfg.solver_config()?;
    if let Some(w) = solver.integrator().stability_warning(&h) {
        report.warnings.push(w);
    }
    let grid = GridDensity::from_gaussian(state, cfg.grid_spec()?)?;
    let times = cfg.times()?;
    let t_end = *times.last().unwrap_or(&0.0);
    let k = cfg.solver.snapshots;
    let snaps: Vec<f64> = (1..=k)
        .map(|i| if i == k { t_end } else { t_end * i as f64 / k as f64 })
        .collect();

    let mut events: Vec<(f64, bool, bool)> = times.iter().map(|&t| (t, true, false)).collect();
    for &t in &snaps {
        match events.iter_mut().find(|e| e.0 == t) {
            Some(e) => e.2 = true,
            None => events.push((t, false, true)),
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut table = Table::new(&["t", "mean_q", "mean_p", "var_q", "var_p", "cov_qp", "mass_raw"]);
    let mut evolver = Evolver::new(grid, &h, solver)?;
    let mut snap_index = 0;
    for (t, row, snap) in events {
        evolver.advance_to(t)?;
        if row {
            table.push(moment_row(t, evolver.density(), evolver.cumulative_mass()));
        }
        if snap {
            snap_index += 1;
            let p = out.path(&format!("density_{snap_index:03}.csv"));
            write_snapshot(&p, t, evolver.density())?;
        }
    }
    let mass = evolver.cumulative_mass();
    let drift = evolver
        .diagnostics()
        .iter()
        .map(|d| (d.cumulative_mass - 1.0).abs())
        .fold(0.0, f64::max);
    out.table("moments.csv", &table)?;
    out.plot(
        "variances.svg",
        &table,
        PlotSpec::new("second moments", "t", &["var_q", "var_p", "cov_qp"]),
    )?;
    report.final_mass = Some(mass);
    report.max_residual = drift;
    Ok(())
}

fn run_moments(cfg: &ScenarioConfig, out: &mut Outputs, report: &mut RunReport) -> Result<(), ScenarioError> {
    let state = cfg.initial_state()?;
    let h = cfg.hamiltonian()?;
    let times = cfg.times()?;
    let dt = cfg.time.dt;

    let mut table = Table::new(&["t", "mean_q", "q_newton", "correction"]);
    let mut ms = state.moments();
    let mut z = state.center();
    let mut excess: f64 = ms.covariance_excess().max(0.0);
    table.push(vec![0.0, ms.mean_q, z.q, ms.mean_q - z.q]);
    for w in times.windows(2) {
        let span = w[1] - w[0];
        if span > 0.0 {
            let traj = evolve_moments(&ms, &h, span, dt)?;
            excess = traj
                .samples
                .iter()
                .map(|(_, m)| m.covariance_excess())
                .fold(excess, f64::max);
            ms = traj.last().1;
            z = newton_trajectory(z, &h, span, dt)?.last().1;
        }
        table.push(vec![w[1], ms.mean_q, z.q, ms.mean_q - z.q]);
    }
    out.table("closure.csv", &table)?;
    out.plot(
        "correction.svg",
        &table,
        PlotSpec::new("mean position minus point trajectory", "t", &["correction"]),
    )?;
    report.max_residual = excess;
    Ok(())
}

fn run_ensemble(cfg: &ScenarioConfig, out: &mut Outputs, report: &mut RunReport) -> Result<(), ScenarioError> {
    let state = cfg.initial_state()?;
    let h = cfg.hamiltonian()?;
    let integrator = cfg.integrator()?;
    if let Some(w) = integrator.stability_warning(&h) {
        report.warnings.push(w);
    }
    let times = cfg.times()?;
    let results = ensemble_trajectory(
        &state,
        &h,
        &times,
        cfg.ensemble.particles,
        cfg.seed,
        &integrator,
        cfg.ensemble.shards,
    )?;
    let mut table = Table::new(&[
        "t", "mean_q", "mean_p", "var_q", "var_p", "cov_qp", "se_mean_q", "se_mean_p", "se_var_q",
        "se_var_p", "se_cov_qp",
    ]);
    for r in &results {
        let mut row = vec![r.t];
        row.extend(r.moments.as_array());
        row.extend(r.std_errors.as_array());
        table.push(row);
    }
    out.table("ensemble.csv", &table)?;
    out.plot(
        "ensemble.svg",
        &table,
        PlotSpec::new("ensemble second moments", "t", &["var_q", "var_p", "cov_qp"]),
    )?;
    Ok(())
}

fn run_measure(
    cfg: &ScenarioConfig,
    out: &mut Outputs,
    report: &mut RunReport,
) -> Result<EstimateResult, ScenarioError> {
    let dev = cfg.device()?;
    let m = &cfg.measurement;
    let samples = sample_measurements(&dev, m.x_true, m.samples, cfg.seed)?;
    let step = dev.step();

    let p = out.path("samples.csv");
    write_records(
        &p,
        &["index", "m", "value"],
        samples
            .indices()
            .iter()
            .enumerate()
            .map(|(i, &k)| [i.to_string(), k.to_string(), format_float(step.lattice_value(k))]),
    )?;

    let est = estimate(&samples, dev.sigma_syst())?;
    let mut t = Table::new(&["n", "mean_est", "s2_rand", "s2_total", "sigma_syst", "systematic_offset"]);
    t.push(vec![
        est.n as f64,
        est.mean_est,
        est.s2_rand,
        est.s2_total,
        dev.sigma_syst(),
        dev.systematic_offset(),
    ]);
    out.table("estimate.csv", &t)?;

    let model = model_density(&dev, m.x_true)?;
    let mut recon: Vec<(&str, &ReconstructionDensity)> = vec![("finite_n", &est.density)];
    let limit = if dev.sigma_syst() > 0.0 {
        Some(rho_infinity(est.mean_est, dev.sigma_syst())?)
    } else {
        None
    };
    if let Some(l) = &limit {
        recon.push(("limit", l));
    }
    if let Some(md) = &model {
        recon.push(("model", md));
    }
    let p = out.path("reconstruction.csv");
    write_records(
        &p,
        &["kind", "mean", "variance"],
        recon
            .iter()
            .map(|(k, d)| [k.to_string(), format_float(d.mean()), format_float(d.variance())]),
    )?;

    let empirical = empirical_cell_frequencies(&samples);
    let mut freq = Table::new(&["m", "value", "frequency", "model_probability"]);
    if let Some(md) = &model {
        let window = window_for(md, step, 8.0);
        let lo = (*window.start()).min(*empirical.probs.keys().next().unwrap_or(window.start()));
        let hi = (*window.end()).max(*empirical.probs.keys().next_back().unwrap_or(window.end()));
        let probs = cell_probabilities(md, step, lo..=hi)?;
        for k in lo..=hi {
            freq.push(vec![k as f64, step.lattice_value(k), empirical.get(k), probs.get(k)]);
        }
    } else {
        for (&k, &f) in &empirical.probs {
            freq.push(vec![k as f64, step.lattice_value(k), f, f64::NAN]);
        }
    }
    out.table("frequencies.csv", &freq)?;
    out.plot(
        "frequencies.svg",
        &freq,
        PlotSpec::new("reading frequencies", "value", &["frequency", "model_probability"]),
    )?;

    let identity = (est.s2_total - (est.s2_rand / est.n as f64 + dev.sigma_syst().powi(2))).abs();
    report.max_residual = report.max_residual.max(identity);
    Ok(est)
}

/// The instrument's reading distribution `N(x_true + offset, sigma_rand^2)`,
/// absent for a noiseless instrument.
fn model_density(dev: &MeasurementDevice, x_true: f64) -> Result<Option<ReconstructionDensity>, ScenarioError> {
    if dev.sigma_rand() == 0.0 {
        return Ok(None);
    }
    Ok(Some(ReconstructionDensity::model(
        x_true + dev.systematic_offset(),
        dev.sigma_rand().powi(2),
    )?))
}

fn run_converge(cfg: &ScenarioConfig, out: &mut Outputs, report: &mut RunReport) -> Result<(), ScenarioError> {
    let dev = cfg.device()?;
    let iv = cfg.interval()?;
    let c = &cfg.converge;
    let settings = ConvergenceSettings {
        n_schedule: c.n_schedule.clone(),
        trials: c.trials,
        fresh_draws: c.fresh_draws,
        seed: cfg.seed,
    };
    let rep = convergence_experiment(&dev, cfg.measurement.x_true, &settings, &iv)?;
    let mut table = Table::new(&["n", "limit_probability", "frequency", "gap", "error_bar", "device_gap"]);
    for r in &rep.rows {
        table.push(vec![
            r.n as f64,
            r.limit_probability,
            r.frequency,
            r.gap,
            r.error_bar,
            r.device_gap,
        ]);
    }
    out.table("convergence.csv", &table)?;
    out.plot(
        "convergence.svg",
        &table,
        PlotSpec::new("interval probability gap", "n", &["gap", "error_bar"]),
    )?;
    report.max_residual = rep.rows.last().map(|r| r.gap).unwrap_or(0.0);
    Ok(())
}
