//! Reproducible experiment runs: declarative configs, run manifests with
//! checksummed outputs, and the study drivers behind the CLI subcommands.

pub mod config;
pub mod manifest;
pub mod runner;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("infeasible analysis: {0}")]
    Infeasible(String),
    #[error("checksum mismatch: {0}")]
    Checksum(String),
}

impl RunError {
    /// Process exit code: 2 config/integrity, 3 numerical, 4 infeasible.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io(_) => 1,
            RunError::Config(_) | RunError::Checksum(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Infeasible(_) => 4,
        }
    }
}
