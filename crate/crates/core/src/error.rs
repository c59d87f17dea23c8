use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unknown axis `{0}`")]
    UnknownAxis(String),

    #[error("axis `{0}` is conditioned on before it is defined")]
    DanglingAxis(String),

    #[error("infeasible budget {gamma}: minimum achievable cost is {min_cost}")]
    Infeasible { gamma: f64, min_cost: f64 },

    #[error("auxiliary alphabet of size {size} exceeds the cardinality bound {bound}")]
    Cardinality { size: usize, bound: usize },

    #[error("search space of {size} candidates exceeds the cap of {cap}")]
    Overflow { size: u128, cap: u128 },

    #[error("model does not support this operation: {0}")]
    Unsupported(String),

    #[error("quadrature did not converge (error estimate {estimate:e})")]
    Quadrature { estimate: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
