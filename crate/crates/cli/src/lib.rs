//! Command-line driver: configuration, experiment runners and output files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod validate;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use run::RunStatus;
