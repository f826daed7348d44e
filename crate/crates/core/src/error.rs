use thiserror::Error;

/// Errors raised by the numerical and simulation kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The model parameters violate an inequality the operation depends on.
    #[error("regime error: requires {requirement} (H = {hurst}, d = {dim})")]
    Regime {
        requirement: &'static str,
        hurst: f64,
        dim: usize,
    },

    #[error("index {index} out of range for path of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Cholesky pivot was not positive.
    #[error("covariance factorization failed at pivot {pivot} (value {value:e})")]
    Factorization { pivot: usize, value: f64 },

    /// The circulant embedding stayed indefinite after all allowed doublings.
    #[error("circulant embedding failed: min eigenvalue {min_eigenvalue:e} relative to max {max_eigenvalue:e} at size {size}")]
    Embedding {
        size: usize,
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// Grid too coarse for the scaled integrand.
    #[error("resolution violation: cell width {cell:e} exceeds {required:e} (kappa = {kappa}, n = {n})")]
    Resolution {
        cell: f64,
        required: f64,
        kappa: f64,
        n: u64,
    },

    #[error("test function is not in H^beta_0: {0}")]
    NotInSpace(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
