use thiserror::Error;

/// Errors raised anywhere in the escape-rate pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("root finder did not converge for target {target} after {iterations} iterations (residual {residual:e})")]
    Convergence {
        target: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("return time exceeds cap {cap} for x = {x:e}")]
    ReturnTimeOverflow { x: f64, cap: usize },

    #[error("power iteration did not converge after {iterations} iterations (ratio spread {spread:e})")]
    EigenNonConvergence { iterations: usize, spread: f64 },

    #[error("matrix has no class with positive spectral radius")]
    Reducible,

    #[error("cylinder masses do not sum to one (sum = {sum})")]
    Normalization { sum: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake-case tag for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Convergence { .. } => "convergence",
            Error::ReturnTimeOverflow { .. } => "return_time_overflow",
            Error::EigenNonConvergence { .. } => "eigen_non_convergence",
            Error::Reducible => "reducible",
            Error::Normalization { .. } => "normalization",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
