use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is a singular boundary point of the function")]
    SingularPoint(Complex64),

    #[error("{0} lies outside the domain")]
    OutsideDomain(Complex64),

    #[error("quadrature did not converge: {0}")]
    NonConvergent(String),

    #[error("aliasing tail {tail:e} exceeds tolerance {tolerance:e}")]
    AliasingTooLarge { tail: f64, tolerance: f64 },

    #[error("undecided: {0}")]
    Undecided(String),

    #[error("no grid point satisfies |phi(z)| > {level}")]
    EmptyLevel { level: f64 },

    #[error("operator is not bounded: {0}")]
    NotBounded(String),

    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Honest numerical indecision, as opposed to a hard failure.
    pub fn is_indecision(&self) -> bool {
        matches!(
            self,
            Error::Undecided(_) | Error::NonConvergent(_) | Error::NoConvergence(_)
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
