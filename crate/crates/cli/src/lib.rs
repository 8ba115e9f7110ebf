//! Library side of the `twofront` binary, split out so tests can drive it.

pub mod commands;
pub mod config;
pub mod svg;
pub mod sweep;

use std::io;
use std::path::PathBuf;

use thiserror::Error;
use twofront_core::{SemiwaveError, SolverError};

pub use config::{parse_config, ConfigError, RunSpec};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_SOLVER: u8 = 2;
pub const EXIT_INDETERMINATE: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver failed: {0}")]
    Solver(#[from] SolverError),
    #[error("semi-wave failed: {0}")]
    Semiwave(#[from] SemiwaveError),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            // bad semi-wave inputs are caught before any solve starts
            CliError::Semiwave(
                SemiwaveError::InvalidParams(_) | SemiwaveError::InvalidTolerance(_),
            ) => EXIT_USAGE,
            CliError::Solver(_) | CliError::Semiwave(_) => EXIT_SOLVER,
            CliError::Usage(_) | CliError::Config(_) | CliError::Io { .. } => EXIT_USAGE,
        }
    }
}
