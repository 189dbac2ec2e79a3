//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use liouville::dynamics::{
    analytic_gaussian_free, analytic_gaussian_linear, ensemble_trajectory, hamilton_flow, Evolver,
    IntegratorConfig, Scheme, SolverConfig,
};
use liouville::measurement::{
    cell_probabilities, convergence_experiment, empirical_cell_frequencies, estimate,
    sample_measurements, window_for, ConvergenceSettings, LatticeInterval, MeasurementDevice,
    RationalStep, ReconstructionDensity,
};
use liouville::moments::{evolve_moments, newton_correction};
use liouville::scenario::{run_scenario, MomentumSection, ScenarioConfig, ScenarioKind};
use liouville::{GaussianState, GridDensity, GridSpec, Hamiltonian, Interpolation, PhasePoint, Potential};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(x: f64, target: f64) -> f64 {
    ((x - target) / target).abs()
}

/// Criteria 1 and 2 share one grid run.
fn free_motion() -> (Outcome, Outcome) {
    let s = GaussianState::new(0.0, 1.0, 1.0, 1.0).unwrap();
    let h = Hamiltonian::free(1.0).unwrap();
    let spec = GridSpec::square(12.0, 512).unwrap();
    let cfg = SolverConfig::default();
    let start = Instant::now();
    let mut ev = Evolver::new(GridDensity::from_gaussian(&s, spec).unwrap(), &h, cfg).unwrap();
    let run = ev.advance_to(2.0);
    let secs = start.elapsed().as_secs_f64();
    let mut lines = Vec::new();
    let mut pass = run.is_ok();
    if let Err(e) = &run {
        lines.push(format!("grid run failed: {e}"));
    }
    let m = ev.density().moments();
    let (e_var, e_mean) = (rel(m.var_q, 2.5), rel(m.mean_q, 2.0));
    pass &= e_var <= 0.02 && e_mean <= 0.005 && secs < 60.0;
    lines.push(format!(
        "grid var_q={:.6} (rel {e_var:.1e}) mean_q={:.6} (rel {e_mean:.1e}) in {secs:.1} s",
        m.var_q, m.mean_q
    ));

    let exact = analytic_gaussian_free(&s, 1.0, 2.0).unwrap();
    let closure = evolve_moments(&s.moments(), &h, 2.0, 1e-3).unwrap().last().1;
    let worst = [
        (exact.var_q - 2.5).abs(),
        (exact.mean_q - 2.0).abs(),
        (closure.var_q - 2.5).abs(),
        (closure.mean_q - 2.0).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    pass &= worst <= 1e-8;
    lines.push(format!("analytic/closure max err {worst:.1e}"));

    let drift = ev
        .diagnostics()
        .iter()
        .map(|d| (d.cumulative_mass - 1.0).abs())
        .fold(0.0, f64::max);
    let c2 = outcome(
        run.is_ok() && drift <= 1e-3,
        format!("max |raw mass - 1| = {drift:.2e} over {} steps", ev.diagnostics().len()),
    );
    (outcome(pass, lines.join("; ")), c2)
}

fn liouville_constancy() -> Outcome {
    let s = GaussianState::new(1.0, 0.0, 0.5, 0.5).unwrap();
    let h = Hamiltonian::new(1.0, Potential::quartic(1.0)).unwrap();
    let integrator = IntegratorConfig::leapfrog(1e-2).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut points: Vec<(f64, PhasePoint)> = (0..100)
        .map(|_| {
            let zq: f64 = rng.sample(StandardNormal);
            let zp: f64 = rng.sample(StandardNormal);
            let z = PhasePoint::new(s.q0() + s.a() / 2f64.sqrt() * zq, s.p0() + s.b() / 2f64.sqrt() * zp);
            (rng.gen_range(0.0..=2.0), z)
        })
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut worst_flow: f64 = 0.0;
    for &(t, z) in &points {
        let back = hamilton_flow(hamilton_flow(z, &h, t, &integrator), &h, -t, &integrator);
        worst_flow = worst_flow.max((s.density_at(z) - s.density_at(back)).abs());
    }

    let spec = GridSpec::square(5.0, 512).unwrap();
    let cfg = SolverConfig::default().with_integrator(integrator);
    let mut ev = Evolver::new(GridDensity::from_gaussian(&s, spec).unwrap(), &h, cfg).unwrap();
    let mut worst_grid: f64 = 0.0;
    for &(t, z) in &points {
        if let Err(e) = ev.advance_to(t) {
            return outcome(false, format!("grid run failed: {e}"));
        }
        let zt = hamilton_flow(z, &h, t, &integrator);
        let value = ev.density().sample(zt, Interpolation::CubicClamped);
        worst_grid = worst_grid.max((value - s.density_at(z)).abs());
    }
    outcome(
        worst_flow <= 1e-10 && worst_grid <= 1e-2,
        format!("flow round trip {worst_flow:.1e}, grid vs rho0 {worst_grid:.2e} (peak {:.3})", s.density_at(s.center())),
    )
}

fn harmonic_recurrence() -> Outcome {
    let s = GaussianState::new(2.0, 0.0, 1.0, 1.0).unwrap();
    let h = Hamiltonian::new(1.0, Potential::harmonic(1.0)).unwrap();
    let spec = GridSpec::square(12.0, 512).unwrap();
    let d0 = GridDensity::from_gaussian(&s, spec).unwrap();
    let cfg = SolverConfig::default().with_integrator(IntegratorConfig::leapfrog(1e-2).unwrap());
    let mut ev = Evolver::new(d0.clone(), &h, cfg).unwrap();
    if let Err(e) = ev.advance_to(2.0 * PI) {
        return outcome(false, format!("grid run failed: {e}"));
    }
    let l1 = ev.density().l1_distance(&d0).unwrap();

    let m0 = s.moments();
    let lin = analytic_gaussian_linear(&s, &h, 2.0 * PI).unwrap();
    let clo = evolve_moments(&m0, &h, 2.0 * PI, 1e-3).unwrap().last().1;
    let worst = m0
        .as_array()
        .iter()
        .zip(lin.as_array())
        .zip(clo.as_array())
        .map(|((x0, a), c)| (x0 - a).abs().max((x0 - c).abs()))
        .fold(0.0, f64::max);
    outcome(l1 <= 5e-2 && worst <= 1e-6, format!("L1 {l1:.2e}, moment err {worst:.1e}"))
}

fn newton_corrections() -> Outcome {
    let s = GaussianState::new(1.0, 0.0, 0.2, 0.2).unwrap();
    let h = Hamiltonian::new(1.0, Potential::quartic(1.0)).unwrap();
    let times = [0.25, 0.5, 1.0];
    let dt = 1e-3;
    let closure = newton_correction(&s, &h, 1.0, dt).unwrap();
    let closure_traj = evolve_moments(&s.moments(), &h, 1.0, dt).unwrap();
    let integrator = IntegratorConfig::new(dt, Scheme::Rk4).unwrap();
    let ens = ensemble_trajectory(&s, &h, &times, 1_000_000, 99, &integrator, 1).unwrap();

    let mut pass = true;
    let mut parts = Vec::new();
    for (t, r) in times.iter().zip(&ens) {
        let k = (t / dt).round() as usize;
        let (tc, corr) = closure[k];
        let (_, ms) = closure_traj.samples[k];
        assert!((tc - t).abs() < 1e-9);
        let q_newton = ms.mean_q - corr;
        let ens_corr = r.moments.mean_q - q_newton;
        let z = (corr - ens_corr).abs() / r.std_errors.mean_q;
        pass &= z <= 3.0;
        parts.push(format!("t={t}: closure {corr:.3e} ensemble {ens_corr:.3e} ({z:.2} SE)"));
    }

    let quadratic = Hamiltonian::new(1.0, Potential::new(vec![0.3, -0.2, 0.7]).unwrap()).unwrap();
    let worst = newton_correction(&s, &quadratic, 1.0, dt)
        .unwrap()
        .iter()
        .map(|(_, c)| c.abs())
        .fold(0.0, f64::max);
    pass &= worst <= 1e-8;
    parts.push(format!("quadratic max {worst:.1e}"));
    outcome(pass, parts.join("; "))
}

fn cell_frequencies() -> Outcome {
    let step = RationalStep::new(1, 10).unwrap();
    let dev = MeasurementDevice::new(step, 0.0, 1.0, 0.0).unwrap();
    let samples = sample_measurements(&dev, 0.0, 100_000, 6).unwrap();
    let model = ReconstructionDensity::model(0.0, 1.0).unwrap();
    let freq = empirical_cell_frequencies(&samples);
    let lo = (*window_for(&model, step, 8.0).start()).min(*freq.probs.keys().next().unwrap());
    let hi = (*window_for(&model, step, 8.0).end()).max(*freq.probs.keys().next_back().unwrap());
    let probs = cell_probabilities(&model, step, lo..=hi).unwrap();
    let worst = freq.max_abs_difference(&probs);
    outcome(worst <= 5e-3, format!("max |n_m/n - p_m| = {worst:.2e}"))
}

fn estimator_pipeline() -> Outcome {
    let step = RationalStep::new(1, 100).unwrap();
    let (sigma_syst, sigma_rand, offset, x_true) = (0.3, 1.0, 0.07, 1.5);
    let dev = MeasurementDevice::new(step, sigma_syst, sigma_rand, offset).unwrap();
    let trials = 1000;
    let mut means = Vec::with_capacity(trials);
    let mut identity = true;
    for trial in 0..trials {
        let samples = sample_measurements(&dev, x_true, 100, 10_000 + trial as u64).unwrap();
        let est = estimate(&samples, sigma_syst).unwrap();
        identity &= est.s2_total == est.s2_rand / est.n as f64 + sigma_syst * sigma_syst;
        means.push(est.mean_est);
    }
    let n = trials as f64;
    let mean = means.iter().sum::<f64>() / n;
    let sd = (means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let z = (mean - (x_true + offset)).abs() / (sd / n.sqrt());

    let big = sample_measurements(&dev, x_true, 10_000, 77).unwrap();
    let s2 = estimate(&big, sigma_syst).unwrap().s2_rand;
    let target = sigma_rand * sigma_rand + step.squared() / 12.0;
    let e = rel(s2, target);
    outcome(
        z <= 4.0 && identity && e <= 0.05,
        format!("mean off by {z:.2} SE; identity exact: {identity}; S2_rand rel err {e:.2e}"),
    )
}

fn interval_convergence() -> Outcome {
    let step = RationalStep::new(1, 20).unwrap();
    let dev = MeasurementDevice::with_drawn_offset(step, 0.2, 0.5, 8).unwrap();
    let iv = LatticeInterval::from_indices(step, -4, 5).unwrap();
    let settings = ConvergenceSettings {
        n_schedule: vec![100, 1_000, 10_000, 100_000],
        trials: 1,
        fresh_draws: 100_000,
        seed: 8,
    };
    let rep = convergence_experiment(&dev, 0.0, &settings, &iv).unwrap();
    let last = rep.rows.last().unwrap();
    let monotone = rep.is_non_increasing(3.0);
    let gaps: Vec<String> = rep.rows.iter().map(|r| format!("{:.1e}", r.gap)).collect();
    outcome(
        last.gap <= 0.01 && monotone,
        format!(
            "[{:.3}, {:.3}] gaps {} (bar {:.1e}); non-increasing: {monotone}; device gap at n=1e5 {:.2e}",
            iv.a(),
            iv.b(),
            gaps.join(" "),
            last.error_bar,
            last.device_gap
        ),
    )
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let mut configs = Vec::new();
    for kind in [
        ScenarioKind::Evolve,
        ScenarioKind::Moments,
        ScenarioKind::Ensemble,
        ScenarioKind::Measure,
        ScenarioKind::Converge,
        ScenarioKind::Compose,
    ] {
        let mut cfg = ScenarioConfig::with_defaults(kind);
        cfg.seed = 31;
        cfg.grid.nq = 96;
        cfg.grid.np = 96;
        cfg.time.t_end = 0.5;
        cfg.time.dt = 1e-2;
        cfg.time.samples = 5;
        cfg.hamiltonian.potential = vec![0.0, 0.0, 0.0, 0.0, 0.25];
        cfg.ensemble.particles = 20_000;
        cfg.converge.n_schedule = vec![100, 1000];
        cfg.converge.fresh_draws = 10_000;
        cfg.measurement.sigma_syst = 0.5;
        cfg.momentum = Some(MomentumSection {
            mean: 0.0,
            variance: 0.5,
        });
        configs.push(cfg);
    }
    let mut parallel = configs[2].clone();
    parallel.ensemble.shards = 4;

    let mut compared = 0;
    let mut mismatches = Vec::new();
    let mut pairs: Vec<(ScenarioConfig, ScenarioConfig)> = configs.iter().map(|c| (c.clone(), c.clone())).collect();
    pairs.push((configs[2].clone(), parallel));
    for (i, (a, b)) in pairs.into_iter().enumerate() {
        let mut a = a;
        let mut b = b;
        a.output_dir = root.path().join(format!("{i}a"));
        b.output_dir = root.path().join(format!("{i}b"));
        let ra = match run_scenario(&a) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("{} failed: {e}", a.kind.name())),
        };
        if let Err(e) = run_scenario(&b) {
            return outcome(false, format!("{} failed: {e}", b.kind.name()));
        }
        for f in ra.files.iter().filter(|f| f.extension().is_some_and(|e| e == "csv")) {
            let other = b.output_dir.join(f.file_name().unwrap());
            compared += 1;
            if std::fs::read(f).ok() != std::fs::read(&other).ok() {
                mismatches.push(f.display().to_string());
            }
        }
    }
    outcome(
        mismatches.is_empty() && compared > 0,
        format!("{compared} CSV files compared, {} differ {:?}", mismatches.len(), mismatches),
    )
}

fn main() {
    let names = [
        "free-motion delocalization",
        "mass conservation",
        "constancy along characteristics",
        "harmonic recurrence",
        "Newton corrections",
        "cell-frequency law of large numbers",
        "estimator pipeline",
        "interval probability convergence",
        "determinism",
    ];
    let (c1, c2) = free_motion();
    let results = [
        c1,
        c2,
        liouville_constancy(),
        harmonic_recurrence(),
        newton_corrections(),
        cell_frequencies(),
        estimator_pipeline(),
        interval_convergence(),
        determinism(),
    ];
    let mut failed = 0;
    for (i, (name, r)) in names.iter().zip(&results).enumerate() {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {name}: {}", i + 1, r.detail);
        failed += usize::from(!r.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
