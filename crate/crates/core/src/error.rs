use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A documented precondition of an operation does not hold.
    #[error("contract violated: {0}")]
    Contract(String),

    #[error("{count} tied columns exceed the exhaustive tie-break cap of {cap}")]
    TooManyTiedColumns { count: usize, cap: usize },

    #[error("scenario source exhausted: {needed} rows needed, only {available} available")]
    DataInsufficient { needed: usize, available: usize },

    #[error("model has {n_bin} binaries, enumeration is capped at {cap}")]
    EnumerationCap { n_bin: usize, cap: usize },

    #[error("model error: {0}")]
    Model(String),

    #[error("unit configuration, key `{key}`: {message}")]
    UnitConfig { key: String, message: String },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("reduced problem infeasible")]
    Infeasible,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
