//! Command-line front end: runs integrations, audits and example
//! reproductions from a TOML config and writes a trajectory table plus a
//! TOML summary.

pub mod config;
pub mod output;
mod run;
pub mod sweep;

use std::path::Path;

pub use config::{Command, Format, RunConfig};
pub use output::{OutputPaths, OUTPUT_DIR_ENV};
pub use run::{execute, RunOutcome, Status};
pub use sweep::{run_sweep, SweepGrid};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] finsler_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Process exit status for each outcome.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const INTEGRATION: i32 = 3;
}
