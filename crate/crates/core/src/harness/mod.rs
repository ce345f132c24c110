//! Statistics, experiment configs and reports, the cross-scale experiments
//! and the acceptance criteria.

pub mod config;
pub mod experiments;
pub mod report;
pub mod run;
pub mod stats;
pub mod verify;

pub use config::{ExperimentConfig, SCHEMA_VERSION};
pub use report::{CriterionResult, Metric, StatReport, Uncertainty};
pub use run::{execute, preset, run, RunOutput};
