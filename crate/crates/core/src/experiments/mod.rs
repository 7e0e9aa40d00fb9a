//! Scenario runner: configuration files, figure presets, parameter sweeps and
//! the files they produce.

use std::path::PathBuf;

use thiserror::Error;

use crate::dynamics::IntegrateError;

mod config;
mod output;
mod preset;
mod scenario;
mod sweep;

pub use config::{
    parse_document, AnalysisConfig, ConfigDocument, Outputs, ScenarioConfig, StateSpec, SweepAxis, SweepConfig,
    CONFIG_NORM_TOL,
};
pub use output::{report_json, sweep_csv, trajectory_csv, CSV_HEADER};
pub use preset::{preset, run_preset, PresetName, PresetOutcome};
pub use scenario::{analyze, prepare, run_scenario, simulate, Prepared, Report, RunSummary, ScenarioOutcome};
pub use sweep::{run_sweep, SweepRow, SweepTable};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{field}: {msg}")]
    Invalid { field: String, msg: String },
    #[error("integration aborted: {0}")]
    Integrate(#[from] IntegrateError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ExperimentError {
    pub(crate) fn invalid(field: &str, msg: impl Into<String>) -> Self {
        ExperimentError::Invalid {
            field: field.to_string(),
            msg: msg.into(),
        }
    }

    /// Process exit status for this failure: 3 for integrator aborts, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Integrate(_) => 3,
            _ => 2,
        }
    }
}
