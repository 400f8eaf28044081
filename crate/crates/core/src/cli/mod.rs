//! Experiment harness behind the `rbcs` binary: seeded trial sweeps, the
//! two-case wavelet pipeline on a surrogate vibration record, CSV output and
//! summaries.

pub mod config;
pub mod csv;
pub mod matrix_io;
pub mod report;
pub mod surrogate;
pub mod sweep;

use std::path::PathBuf;

use thiserror::Error;

use crate::error::BcsError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] BcsError),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
