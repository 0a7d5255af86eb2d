//! Command-line workflows on top of `fisher-bounds`: single-table evaluation,
//! CSV batches, parameter sweeps, reproduction of the reference tables, rank
//! agreement between approximations, and micro-benchmarks.

pub mod batch;
pub mod bench;
pub mod eval;
pub mod format;
pub mod input;
pub mod rank;
pub mod reproduce;
pub mod sweep;

use thiserror::Error;

/// Default number of leading exact terms for the general bound.
pub const DEFAULT_K: u64 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] fisher_bounds::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0} reproduction check(s) failed")]
    ReproductionFailed(usize),
}

impl CliError {
    /// 1 usage, 2 validation, 3 reproduction failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) | CliError::Core(_) | CliError::Io(_) | CliError::Csv(_) => 2,
            CliError::ReproductionFailed(_) => 3,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
