//! Error type shared by all modules, with a coarse category used by the CLI
//! to map failures onto exit codes (config = 2, data = 3, numeric = 4).

use thiserror::Error;

/// Coarse failure class, used by callers that must distinguish "the request
/// was malformed" from "the data cannot support the request" from "the
/// numerics broke down".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Malformed specification: unknown kernel/partition/method strings,
    /// invalid parameters, bad config keys.
    Config,
    /// The input data violates a precondition: empty blocks, malformed CSV,
    /// non-positive compositions, dimension mismatches.
    Data,
    /// Numerical failure: covariance not positive definite, factorization
    /// failed after jitter retries.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel spec `{spec}`: {reason}")]
    BadKernelSpec { spec: String, reason: String },

    #[error("invalid partition spec `{spec}`: {reason}")]
    BadPartitionSpec { spec: String, reason: String },

    #[error("invalid method spec `{spec}`: {reason}")]
    BadMethodSpec { spec: String, reason: String },

    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error("partition block {block} of {blocks} is empty")]
    EmptyBlock { block: usize, blocks: usize },

    #[error("partition block {block} has {len} points but at least {need} are required")]
    BlockTooSmall { block: usize, len: usize, need: usize },

    #[error("malformed CSV at row {row}, column {col}: {reason}")]
    CsvFormat { row: usize, col: usize, reason: String },

    #[error("non-positive entry {value} at row {row}, column {col}: compositions must be strictly positive")]
    NonPositiveEntry { row: usize, col: usize, value: f64 },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("gain matrix row {row} is entirely zero")]
    ZeroRow { row: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    #[error("invalid domain rectangle: {0}")]
    InvalidDomain(String),

    #[error("no parameters for cluster {cluster}: the parameter table covers {available} clusters")]
    MissingClusterParams { cluster: usize, available: usize },

    #[error("{what} is not positive definite (smallest eigenvalue {eigenvalue:.6e}, threshold {threshold:.6e})")]
    NotPositiveDefinite {
        what: String,
        eigenvalue: f64,
        threshold: f64,
    },

    #[error("covariance factorization failed after {attempts} jitter attempts")]
    FactorizationFailed { attempts: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// The coarse category this error belongs to; drives CLI exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::BadKernelSpec { .. }
            | Error::BadPartitionSpec { .. }
            | Error::BadMethodSpec { .. }
            | Error::BadConfig(_) => ErrorCategory::Config,
            Error::EmptyBlock { .. }
            | Error::BlockTooSmall { .. }
            | Error::CsvFormat { .. }
            | Error::NonPositiveEntry { .. }
            | Error::DimensionMismatch { .. }
            | Error::ZeroRow { .. }
            | Error::NonFinite { .. }
            | Error::InvalidDomain(_)
            | Error::MissingClusterParams { .. }
            | Error::Io(_) => ErrorCategory::Data,
            Error::NotPositiveDefinite { .. } | Error::FactorizationFailed { .. } => {
                ErrorCategory::Numeric
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
