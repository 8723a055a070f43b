//! Batch front end for satbeam: solves, Monte Carlo sweeps and PA curves
//! driven by TOML configuration files.

pub mod commands;
pub mod config;

pub use commands::{pa_curve, solve, sweep, validate, Output};
pub use config::ConfigDoc;

use thiserror::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },

    #[error("malformed config: {0}")]
    Parse(String),

    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] satbeam_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(satbeam_core::Error::NotConverged(_)) => EXIT_NOT_CONVERGED,
            _ => EXIT_CONFIG,
        }
    }
}
