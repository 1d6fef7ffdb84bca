//! Error type shared across the crate.
//!
//! Errors are grouped so the CLI can map them onto stable exit codes:
//! I/O problems exit with 3, numerical failures (non-convergence,
//! decomposition residuals) with 2, and everything else (validation of
//! inputs, dimensions, configuration) with 1.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(
        "solver did not converge: achieved gap {achieved_gap:.3e} after {iterations} \
         iterations (tolerance {tolerance:.3e})"
    )]
    NonConvergence {
        achieved_gap: f64,
        iterations: usize,
        tolerance: f64,
    },

    #[error("averaging decomposition residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    DecompositionResidual { residual: f64, tolerance: f64 },

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 validation, 2 numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::NonConvergence { .. } | Error::DecompositionResidual { .. } => 2,
            _ => 1,
        }
    }
}
