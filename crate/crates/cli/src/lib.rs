//! Command-line driver: index snapshots, run pipelines across a collection,
//! evaluate runs and compare re-implementations with original runs.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

pub use args::{execute, Cli};
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
