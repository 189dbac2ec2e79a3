use thiserror::Error;

/// Errors produced by the simulation and statistics routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain too small: sampled mass {mass:.6} before renormalization is below 0.99")]
    DomainTooSmall { mass: f64 },

    #[error("unsupported derivative order {0} (maximum is 3)")]
    UnsupportedOrder(usize),

    #[error("potential of degree {degree} exceeds the supported maximum {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("potential of degree {0} is not quadratic; no closed-form linear flow")]
    NonlinearPotential(usize),

    #[error("mass leak at t={t:.6}: raw mass {mass:.6} is outside 1 +/- {tolerance}")]
    MassLeak { t: f64, mass: f64, tolerance: f64 },

    #[error("closure breakdown at t={t:.6}: cov^2 - var_q*var_p = {excess:.3e}")]
    ClosureBreakdown { t: f64, excess: f64 },

    #[error("index window too small: tail mass {tail:.3e} exceeds 1e-6")]
    WindowTooSmall { tail: f64 },

    #[error("at least 2 samples are required, got {0}")]
    InsufficientSamples(usize),

    #[error("total variance of the reconstruction is zero")]
    ZeroVariance,

    #[error("interval endpoint {0} is not on the half-point lattice")]
    OffLattice(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
