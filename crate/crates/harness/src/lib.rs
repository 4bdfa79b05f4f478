//! Experiment orchestration for the `dlab` command line tool.

pub mod config;
pub mod error;
pub mod manifest;
pub mod report;
pub mod run;
pub mod schedule;

pub use config::{ExperimentConfig, Kind};
pub use error::HarnessError;
pub use manifest::RunManifest;
pub use run::{run, RunOptions, RunOutcome};
