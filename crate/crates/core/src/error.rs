use thiserror::Error;

/// Errors raised by the library. Every variant carries enough context to be
/// reported verbatim by the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("divergent integral: {what} (growth exponent {exponent} must be < {limit})")]
    Divergent { what: String, exponent: f64, limit: f64 },

    #[error("singular input: {0}")]
    Singular(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error:e}")]
    NotConverged { estimate: f64, error: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

impl Error {
    /// Process exit status for this error: 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::DimensionMismatch { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
