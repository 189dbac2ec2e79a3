//! Semi-Lagrangian solver for the Liouville equation on a uniform grid.
//!
//! The density is constant along characteristics, so one step of length `dt`
//! sets every node to the previous field read at the node's backward foot
//! point `Phi_{-dt}(z)`. For a time-independent Hamiltonian the foot points
//! of a full step never change and are computed once per [`Evolver`].

use rayon::prelude::*;

use super::{hamilton_step, step_plan, IntegratorConfig};
use crate::error::{invalid, Error, Result};
use crate::phase_space::{GridDensity, Hamiltonian, Interpolation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    integrator: IntegratorConfig,
    interpolation: Interpolation,
    renormalize_each_step: bool,
    mass_leak_tolerance: f64,
}

impl SolverConfig {
    pub fn new(
        integrator: IntegratorConfig,
        interpolation: Interpolation,
        renormalize_each_step: bool,
        mass_leak_tolerance: f64,
    ) -> Result<Self> {
        if !(mass_leak_tolerance > 0.0 && mass_leak_tolerance <= 0.1) {
            return Err(invalid(
                "mass_leak_tolerance",
                format!("must lie in (0, 0.1], got {mass_leak_tolerance}"),
            ));
        }
        Ok(Self {
            integrator,
            interpolation,
            renormalize_each_step,
            mass_leak_tolerance,
        })
    }

    pub fn integrator(&self) -> &IntegratorConfig {
        &self.integrator
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn renormalize_each_step(&self) -> bool {
        self.renormalize_each_step
    }

    pub fn mass_leak_tolerance(&self) -> f64 {
        self.mass_leak_tolerance
    }

    pub fn with_integrator(mut self, integrator: IntegratorConfig) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            interpolation: Interpolation::CubicClamped,
            renormalize_each_step: true,
            mass_leak_tolerance: 1e-2,
        }
    }
}

/// Mass bookkeeping for one solver step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    /// Time at the end of the step.
    pub t: f64,
    /// Field mass right after interpolation and clamping.
    pub raw_mass: f64,
    /// Product of the per-step mass ratios: the mass the field would carry
    /// had it never been renormalized.
    pub cumulative_mass: f64,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub density: GridDensity,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Evolution {
    /// Largest `|cumulative_mass - 1|` over the run.
    pub fn max_mass_deviation(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| (d.cumulative_mass - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Stateful stepper that can be advanced to successive times.
#[derive(Debug, Clone)]
pub struct Evolver {
    hamiltonian: Hamiltonian,
    cfg: SolverConfig,
    density: GridDensity,
    scratch: Vec<f64>,
    feet: Vec<(f64, f64)>,
    time: f64,
    cumulative: f64,
    diagnostics: Vec<StepDiagnostics>,
}

impl Evolver {
    /// The initial density must be normalized to within `1e-6`.
    pub fn new(initial: GridDensity, hamiltonian: &Hamiltonian, cfg: SolverConfig) -> Result<Self> {
        let mass = initial.total_mass();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(invalid(
                "initial density",
                format!("must be normalized, total mass is {mass}"),
            ));
        }
        let feet = foot_points(&initial, hamiltonian, cfg.integrator.dt(), &cfg);
        let scratch = vec![0.0; initial.values().len()];
        Ok(Self {
            hamiltonian: hamiltonian.clone(),
            cfg,
            density: initial,
            scratch,
            feet,
            time: 0.0,
            cumulative: 1.0,
            diagnostics: Vec::new(),
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn density(&self) -> &GridDensity {
        &self.density
    }

    pub fn diagnostics(&self) -> &[StepDiagnostics] {
        &self.diagnostics
    }

    pub fn cumulative_mass(&self) -> f64 {
        self.cumulative
    }

    /// Advances to absolute time `t >= self.time()`.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if !(t.is_finite() && t >= self.time - 1e-12) {
            return Err(invalid(
                "t",
                format!("cannot advance from {} back to {t}", self.time),
            ));
        }
        let dt = self.cfg.integrator.dt();
        let (n, rem) = step_plan(t - self.time, dt);
        let start = self.time;
        for k in 0..n {
            let t_end = if k + 1 == n && rem == 0.0 {
                t
            } else {
                start + (k + 1) as f64 * dt
            };
            self.step(None, t_end)?;
        }
        if rem > 0.0 {
            let feet = foot_points(&self.density, &self.hamiltonian, rem, &self.cfg);
            self.step(Some(&feet), t)?;
        }
        Ok(())
    }

    pub fn into_evolution(self) -> Evolution {
        Evolution {
            density: self.density,
            diagnostics: self.diagnostics,
        }
    }

    fn step(&mut self, feet: Option<&[(f64, f64)]>, t: f64) -> Result<()> {
        let feet = feet.unwrap_or(&self.feet);
        let np = self.density.spec().np;
        let field = &self.density;
        let interpolation = self.cfg.interpolation;
        self.scratch
            .par_chunks_mut(np)
            .zip(feet.par_chunks(np))
            .for_each(|(row, row_feet)| {
                for (v, &(x, y)) in row.iter_mut().zip(row_feet) {
                    *v = match interpolation {
                        Interpolation::Bilinear => field.bilinear(x, y),
                        Interpolation::CubicClamped => field.cubic(x, y).max(0.0),
                    };
                }
            });

        let before = self.density.total_mass();
        self.density.swap_values(&mut self.scratch);
        let raw = self.density.total_mass();
        self.cumulative *= raw / before;

        self.time = t;
        self.diagnostics.push(StepDiagnostics {
            t,
            raw_mass: raw,
            cumulative_mass: self.cumulative,
        });

        let tol = self.cfg.mass_leak_tolerance;
        if self.cumulative.is_nan() || (self.cumulative - 1.0).abs() > tol {
            return Err(Error::MassLeak {
                t,
                mass: self.cumulative,
                tolerance: tol,
            });
        }
        if self.cfg.renormalize_each_step {
            self.density.scale(1.0 / raw);
        }
        Ok(())
    }
}

/// Fractional grid indices of the backward foot point of every node.
fn foot_points(
    grid: &GridDensity,
    h: &Hamiltonian,
    dt: f64,
    cfg: &SolverConfig,
) -> Vec<(f64, f64)> {
    let spec = *grid.spec();
    let scheme = cfg.integrator.scheme();
    let (dq, dp) = (spec.dq(), spec.dp());
    let mut feet = vec![(0.0, 0.0); spec.len()];
    feet.par_chunks_mut(spec.np)
        .enumerate()
        .for_each(|(i, row)| {
            for (j, f) in row.iter_mut().enumerate() {
                let foot = hamilton_step(spec.node(i, j), h, -dt, scheme);
                *f = (
                    (foot.q - spec.q_min) / dq - 0.5,
                    (foot.p - spec.p_min) / dp - 0.5,
                );
            }
        });
    feet
}

/// Evolves `initial` to time `t >= 0`.
pub fn evolve_semilagrangian(
    initial: &GridDensity,
    h: &Hamiltonian,
    t: f64,
    cfg: &SolverConfig,
) -> Result<Evolution> {
    if t.is_nan() || t < 0.0 {
        return Err(invalid("t", format!("grid evolution needs t >= 0, got {t}")));
    }
    let mut evolver = Evolver::new(initial.clone(), h, *cfg)?;
    evolver.advance_to(t)?;
    Ok(evolver.into_evolution())
}
