use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch in {context}: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is singular or not positive definite: {0}")]
    Singular(&'static str),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("bisection bracket does not enclose a root (power at upper bound {power_at_upper:e}, budget {budget:e})")]
    Bracket { power_at_upper: f64, budget: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
