//! Experiment runner around `mri-core`: JSON configs, the binary snapshot
//! container, interpolant files and CSV reports. The `mri` binary wraps
//! [`commands`].

pub mod artifact;
pub mod commands;
pub mod config;
pub mod container;
pub mod error;
pub mod fom;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
