//! Experiment runner for the betting strategies in `gtp-core`: config
//! parsing, the subcommands and their CSV / JSON outputs.

pub mod commands;
pub mod config;
pub mod specs;

pub use commands::{CmdError, CmdResult, Experiment, Outcome, SCHEMA_VERSION};
pub use config::{ConfigError, ExperimentConfig, Theorem};
