//! Scenario configuration: a sectioned TOML document with a strict schema.
//!
//! ```toml
//! kind = "evolve"
//! seed = 7
//!
//! [state]
//! q0 = 0.0
//! p0 = 1.0
//!
//! [hamiltonian]
//! mass = 1.0
//! potential = [0.0, 0.0, 0.5]
//! ```
//!
//! Omitted keys and sections take the defaults below. Unknown keys are
//! rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::dynamics::{IntegratorConfig, Scheme, SolverConfig};
use crate::measurement::{LatticeInterval, MeasurementDevice, RationalStep};
use crate::phase_space::{GaussianState, GridSpec, Hamiltonian, Interpolation, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Evolve,
    Moments,
    Ensemble,
    Measure,
    Converge,
    Compose,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Evolve => "evolve",
            ScenarioKind::Moments => "moments",
            ScenarioKind::Ensemble => "ensemble",
            ScenarioKind::Measure => "measure",
            ScenarioKind::Converge => "converge",
            ScenarioKind::Compose => "compose",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "yes")]
    pub plots: bool,
    #[serde(default)]
    pub state: StateSection,
    #[serde(default)]
    pub hamiltonian: HamiltonianSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub measurement: MeasurementSection,
    #[serde(default)]
    pub converge: ConvergeSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum: Option<MomentumSection>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

fn yes() -> bool {
    true
}

/// Initial Gaussian state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateSection {
    pub q0: f64,
    pub p0: f64,
    pub a: f64,
    pub b: f64,
}

impl Default for StateSection {
    fn default() -> Self {
        Self {
            q0: 0.0,
            p0: 0.0,
            a: 1.0,
            b: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HamiltonianSection {
    pub mass: f64,
    /// Coefficients `c_0, c_1, ...` of `V(q) = sum c_k q^k`.
    pub potential: Vec<f64>,
}

impl Default for HamiltonianSection {
    fn default() -> Self {
        Self {
            mass: 1.0,
            potential: vec![0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t_end: f64,
    pub dt: f64,
    /// Number of output intervals between 0 and `t_end`.
    pub samples: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            t_end: 2.0,
            dt: 1e-3,
            samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nq: usize,
    pub np: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            q_min: -12.0,
            q_max: 12.0,
            p_min: -12.0,
            p_max: 12.0,
            nq: 512,
            np: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Leapfrog,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpolationName {
    Bilinear,
    Cubic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub scheme: SchemeName,
    pub interpolation: InterpolationName,
    pub renormalize: bool,
    pub mass_leak_tolerance: f64,
    /// Number of density snapshots to write, evenly spaced and ending at
    /// `t_end`.
    pub snapshots: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            scheme: SchemeName::Leapfrog,
            interpolation: InterpolationName::Cubic,
            renormalize: true,
            mass_leak_tolerance: 1e-2,
            snapshots: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub particles: usize,
    /// Worker threads; results do not depend on it.
    pub shards: usize,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            particles: 100_000,
            shards: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasurementSection {
    /// Lattice step written as `"num/den"`.
    pub step: String,
    pub sigma_syst: f64,
    pub sigma_rand: f64,
    /// Fixed systematic offset; drawn from `N(0, sigma_syst^2)` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    pub x_true: f64,
    pub samples: usize,
}

impl Default for MeasurementSection {
    fn default() -> Self {
        Self {
            step: "1/10".to_string(),
            sigma_syst: 0.1,
            sigma_rand: 1.0,
            offset: None,
            x_true: 0.0,
            samples: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeSection {
    pub n_schedule: Vec<usize>,
    pub trials: usize,
    pub fresh_draws: usize,
    /// Lattice indices `[m, l]` of the interval
    /// `[step (m - 1/2), step (l - 1/2)]`.
    pub interval: [i64; 2],
}

impl Default for ConvergeSection {
    fn default() -> Self {
        Self {
            n_schedule: vec![100, 1_000, 10_000, 100_000],
            trials: 1,
            fresh_draws: 100_000,
            interval: [-4, 5],
        }
    }
}

/// Momentum model attached to a measured position in `compose` runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumSection {
    pub mean: f64,
    pub variance: f64,
}

fn config_err(section: &str, err: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Config(format!("[{section}] {err}"))
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let cfg: ScenarioConfig =
        toml::from_str(text).map_err(|e| ScenarioError::Config(e.to_string().trim_end().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Renders a configuration with every default written out.
pub fn render_config(cfg: &ScenarioConfig) -> Result<String, ScenarioError> {
    toml::to_string(cfg).map_err(|e| ScenarioError::Config(e.to_string()))
}

impl ScenarioConfig {
    /// A configuration of `kind` with every default applied.
    pub fn with_defaults(kind: ScenarioKind) -> Self {
        Self {
            kind,
            seed: 0,
            output_dir: default_output_dir(),
            plots: true,
            state: StateSection::default(),
            hamiltonian: HamiltonianSection::default(),
            time: TimeSection::default(),
            grid: GridSection::default(),
            solver: SolverSection::default(),
            ensemble: EnsembleSection::default(),
            measurement: MeasurementSection::default(),
            converge: ConvergeSection::default(),
            momentum: None,
        }
    }

    /// Checks every section the scenario kind uses.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.seed > i64::MAX as u64 {
            return Err(config_err("root", "seed must fit in a signed 64-bit integer"));
        }
        match self.kind {
            ScenarioKind::Evolve => {
                self.initial_state()?;
                self.hamiltonian()?;
                self.times()?;
                self.grid_spec()?;
                self.solver_config()?;
            }
            ScenarioKind::Moments => {
                self.initial_state()?;
                let h = self.hamiltonian()?;
                if h.potential().degree() > crate::moments::MAX_CLOSURE_DEGREE {
                    return Err(config_err(
                        "hamiltonian",
                        "moment closure requires a potential of degree <= 4",
                    ));
                }
                self.times()?;
            }
            ScenarioKind::Ensemble => {
                self.initial_state()?;
                self.hamiltonian()?;
                self.times()?;
                self.integrator()?;
                if self.ensemble.particles < 100 {
                    return Err(config_err("ensemble", "particles must be >= 100"));
                }
                if self.ensemble.shards == 0 {
                    return Err(config_err("ensemble", "shards must be >= 1"));
                }
            }
            ScenarioKind::Measure => {
                self.device()?;
                if self.measurement.samples < 2 {
                    return Err(config_err("measurement", "samples must be >= 2"));
                }
            }
            ScenarioKind::Converge => {
                let dev = self.device()?;
                if dev.sigma_syst() <= 0.0 {
                    return Err(config_err("measurement", "sigma_syst must be > 0"));
                }
                self.interval()?;
                let c = &self.converge;
                if c.n_schedule.is_empty() || c.n_schedule.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(config_err("converge", "n_schedule must be non-empty and increasing"));
                }
                if c.n_schedule[0] < 2 {
                    return Err(config_err("converge", "sample sizes must be >= 2"));
                }
                if c.trials == 0 || c.fresh_draws == 0 {
                    return Err(config_err("converge", "trials and fresh_draws must be >= 1"));
                }
            }
            ScenarioKind::Compose => {
                self.device()?;
                if self.measurement.samples < 2 {
                    return Err(config_err("measurement", "samples must be >= 2"));
                }
                let Some(mom) = &self.momentum else {
                    return Err(config_err("momentum", "compose requires a [momentum] section"));
                };
                if !(mom.variance > 0.0 && mom.variance.is_finite() && mom.mean.is_finite()) {
                    return Err(config_err("momentum", "variance must be > 0 and mean finite"));
                }
                self.hamiltonian()?;
                self.times()?;
                self.grid_spec()?;
                self.solver_config()?;
            }
        }
        Ok(())
    }

    pub fn initial_state(&self) -> Result<GaussianState, ScenarioError> {
        let s = &self.state;
        GaussianState::new(s.q0, s.p0, s.a, s.b).map_err(|e| config_err("state", e))
    }

    pub fn hamiltonian(&self) -> Result<Hamiltonian, ScenarioError> {
        let h = &self.hamiltonian;
        let pot = Potential::new(h.potential.clone()).map_err(|e| config_err("hamiltonian", e))?;
        Hamiltonian::new(h.mass, pot).map_err(|e| config_err("hamiltonian", e))
    }

    /// Output times `0, t_end/samples, ..., t_end`.
    pub fn times(&self) -> Result<Vec<f64>, ScenarioError> {
        let t = &self.time;
        if !(t.t_end >= 0.0 && t.t_end.is_finite()) {
            return Err(config_err("time", "t_end must be finite and >= 0"));
        }
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            return Err(config_err("time", "dt must be > 0"));
        }
        if t.samples == 0 {
            return Err(config_err("time", "samples must be >= 1"));
        }
        let k = t.samples;
        Ok((0..=k)
            .map(|i| if i == k { t.t_end } else { t.t_end * i as f64 / k as f64 })
            .collect())
    }

    pub fn grid_spec(&self) -> Result<GridSpec, ScenarioError> {
        let g = &self.grid;
        GridSpec::new((g.q_min, g.q_max), (g.p_min, g.p_max), g.nq, g.np).map_err(|e| config_err("grid", e))
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, ScenarioError> {
        let scheme = match self.solver.scheme {
            SchemeName::Leapfrog => Scheme::Leapfrog,
            SchemeName::Rk4 => Scheme::Rk4,
        };
        IntegratorConfig::new(self.time.dt, scheme).map_err(|e| config_err("time", e))
    }

    pub fn solver_config(&self) -> Result<SolverConfig, ScenarioError> {
        let interpolation = match self.solver.interpolation {
            InterpolationName::Bilinear => Interpolation::Bilinear,
            InterpolationName::Cubic => Interpolation::CubicClamped,
        };
        SolverConfig::new(
            self.integrator()?,
            interpolation,
            self.solver.renormalize,
            self.solver.mass_leak_tolerance,
        )
        .map_err(|e| config_err("solver", e))
    }

    pub fn step(&self) -> Result<RationalStep, ScenarioError> {
        self.measurement
            .step
            .parse()
            .map_err(|e| config_err("measurement", e))
    }

    pub fn device(&self) -> Result<MeasurementDevice, ScenarioError> {
        let m = &self.measurement;
        if !m.x_true.is_finite() {
            return Err(config_err("measurement", "x_true must be finite"));
        }
        let step = self.step()?;
        match m.offset {
            Some(offset) => MeasurementDevice::new(step, m.sigma_syst, m.sigma_rand, offset),
            None => MeasurementDevice::with_drawn_offset(step, m.sigma_syst, m.sigma_rand, self.seed),
        }
        .map_err(|e| config_err("measurement", e))
    }

    pub fn interval(&self) -> Result<LatticeInterval, ScenarioError> {
        let [m, l] = self.converge.interval;
        LatticeInterval::from_indices(self.step()?, m, l).map_err(|e| config_err("converge", e))
    }
}
