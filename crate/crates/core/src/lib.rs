//! Phase-space dynamics of a single classical particle and the statistics of
//! lattice-valued measurements.
//!
//! * [`phase_space`]: Gaussian and gridded densities, polynomial potentials,
//!   observables and their averages.
//! * [`dynamics`]: Hamilton's characteristics, a semi-Lagrangian Liouville
//!   solver, closed-form Gaussian propagation and a Monte Carlo ensemble.
//! * [`moments`]: the Gaussian moment closure and its corrections to the
//!   Newtonian trajectory of the mean.
//! * [`measurement`]: quantized readings, estimators and reconstructed
//!   densities.
//! * [`scenario`]: config-driven runs producing CSV and SVG output.

pub mod dynamics;
pub mod error;
pub mod measurement;
pub mod moments;
pub mod phase_space;
pub mod scenario;

pub use error::{Error, Result};
pub use phase_space::{
    Builtin, GaussianState, GridDensity, GridSpec, Hamiltonian, Interpolation, MomentState,
    Observable, PhasePoint, Potential,
};
