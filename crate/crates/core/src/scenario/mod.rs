//! File-driven runs: a TOML scenario in, CSV tables and SVG plots out.
//!
//! Every output is a pure function of the configuration (including its
//! seed), so re-running a scenario reproduces its files byte for byte.

mod config;
mod output;
mod plot;
mod run;

use std::path::PathBuf;

pub use config::{
    parse_config, render_config, ConvergeSection, EnsembleSection, GridSection, HamiltonianSection,
    InterpolationName, MeasurementSection, MomentumSection, ScenarioConfig, ScenarioKind, SchemeName,
    SolverSection, StateSection, TimeSection,
};
pub use output::{format_float, read_snapshot, write_snapshot, Table};
pub use plot::{emit_plot, render_svg, PlotSpec};
pub use run::{run_scenario, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("config: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        source: crate::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: malformed table: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("plot: no column named `{0}`")]
    MissingColumn(String),
}

impl ScenarioError {
    /// Process exit status for this error: 2 configuration, 3 numerical,
    /// 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config(_) | ScenarioError::MissingColumn(_) => 2,
            ScenarioError::Numerical { .. } => 3,
            ScenarioError::Io { .. } | ScenarioError::Format { .. } => 4,
        }
    }

    /// Prefixes a numerical error with the scenario it came from.
    pub(crate) fn in_scenario(self, kind: ScenarioKind) -> Self {
        match self {
            ScenarioError::Numerical { context, source } if context.is_empty() => ScenarioError::Numerical {
                context: format!("{} scenario", kind.name()),
                source,
            },
            other => other,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ScenarioError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<crate::Error> for ScenarioError {
    fn from(source: crate::Error) -> Self {
        ScenarioError::Numerical {
            context: String::new(),
            source,
        }
    }
}
