//! Library side of the `gaplab` command-line tool: argument types, command
//! implementations, table reproduction, the verification suite and plots.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod output;
pub mod plot;
pub mod suite;
pub mod tables;

use std::path::PathBuf;

use gaplab_core::GapError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] GapError),
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("embedded table data: {0}")]
    Data(String),
    #[error("plot {}: {detail}", path.display())]
    Plot { path: PathBuf, detail: String },
    /// Checks ran and their report was written, but some failed.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 1 for bad input or I/O, 2 for numerical failures and failed checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(GapError::InvalidParams(_) | GapError::Domain(_) | GapError::Precondition(_)) => 1,
            CliError::Core(_) | CliError::Failed(_) => 2,
            CliError::Usage(_) | CliError::Io { .. } | CliError::Csv(_) | CliError::Data(_) | CliError::Plot { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub use args::{Cli, Command};
pub use commands::run;
