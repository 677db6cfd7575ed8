//! Experiment runner for `isac-core`: each subcommand reads an optional JSON
//! config, writes CSV/JSON artifacts into an output directory and reports a
//! short summary.

pub mod commands;
pub mod config;
pub mod table;

use std::path::PathBuf;

pub use commands::{run, Outcome};
pub use config::OutputFormat;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or config; exit status 2.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] isac_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
