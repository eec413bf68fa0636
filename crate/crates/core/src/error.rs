use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} did not converge within {budget} iterations")]
    NonConvergence { what: &'static str, budget: usize },

    #[error("condition scale must be >= 1, got {0}")]
    InvalidKappa(f64),

    #[error("configuration is rank deficient (smallest singular value {0:e})")]
    RankDeficient(f64),

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("embedding dimension {p} must be smaller than the point count {n}")]
    DimensionTooLarge { p: usize, n: usize },

    #[error("codeword length {actual} does not match floor(n/2) = {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("only {found} codeword(s) found at separation {min_sep} after {attempts} attempts")]
    BudgetExhausted {
        found: usize,
        min_sep: f64,
        attempts: usize,
    },

    #[error("base configuration is not centered (|1'X| = {0:e})")]
    NotCentered(f64),

    #[error("row {0} of the base configuration is zero")]
    ZeroRow(usize),

    #[error("need at least {needed} distinct sample sizes, got {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
