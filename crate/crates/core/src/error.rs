use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the seriation toolkit.
#[derive(Debug, Error)]
pub enum SeriationError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An exact engine refused an instance larger than its guard.
    #[error("{engine}: instance too large ({detail})")]
    SizeGuard { engine: &'static str, detail: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A solution (from an engine, a solver or a file) does not agree with
    /// the natively evaluated measure or is structurally broken.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("external solver failed: {0}")]
    Solver(String),

    #[error("model is infeasible")]
    Infeasible,

    /// A time or node limit stopped the search before any solution was found.
    #[error("limit reached without a feasible solution: {0}")]
    NoIncumbent(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = SeriationError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> SeriationError {
    SeriationError::InvalidArgument(msg.into())
}
