//! Batch front end for the spin toolkit: strict JSON configs in, JSON summaries
//! and CSV tables out.

pub mod acceptance;
pub mod config;
pub mod report;
pub mod run;

pub use config::{BodySpec, Command, ConfigError, ExperimentConfig};
pub use run::{execute, ReportBundle, RunError};
