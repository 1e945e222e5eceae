//! Scenario configuration, the simulation loop, metrics, sweeps, validation, and plots.

mod config;
mod office;
mod output;
mod plot;
mod sweep;
mod trial;
mod validate;

use thiserror::Error;

use crate::coord::CoordError;
use crate::env::EnvError;

pub use config::{
    AccessConfig, CoordinationConfig, FieldIssue, ScenarioConfig, TargetConfig, SCENARIO_SCHEMA, SWEEP_AXES,
};
pub use office::{office_access_points, office_map, BUILTIN_OFFICE};
pub use output::{
    read_entropy_csv, read_modes_csv, read_series_csv, read_summary_csv, read_targets_csv, write_run, write_sweep,
    SeriesRow, SummaryRow,
};
pub use plot::render_plots;
pub use sweep::{sweep, SweepResult};
pub use trial::{estimate_targets, match_targets, run_trial, run_trial_in, TargetMatch, TimingStat, TrialMetrics};
pub use validate::{validate, CheckResult, ValidationReport};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Config(Vec<FieldIssue>),
    #[error("unknown sweep axis {axis:?}; valid axes: {valid}")]
    UnknownAxis { axis: String, valid: String },
    #[error("{file}:{line}: {reason}")]
    Schema { file: String, line: usize, reason: String },
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("{0}")]
    Io(String),
    #[error("plot error: {0}")]
    Plot(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Coord(#[from] CoordError),
}

impl SimError {
    /// Errors the user fixes by editing the scenario or command line.
    pub fn is_config_error(&self) -> bool {
        matches!(self, SimError::Config(_) | SimError::UnknownAxis { .. } | SimError::Env(_))
    }
}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e.to_string())
    }
}
