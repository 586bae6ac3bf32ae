use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("group closure exceeded max_order {max_order} (reached {reached} elements)")]
    Capacity { reached: usize, max_order: usize },

    #[error("decomposition of identity infeasible: {0}")]
    Infeasible(String),

    #[error("generators do not generate the group: Cayley graph disconnected (lambda2 = {lambda2:e})")]
    Disconnected { lambda2: f64 },

    #[error("slice misses the support of the body")]
    EmptySlice,

    #[error("integration domain too small: {message}; suggested half-width {suggested}")]
    DomainTooSmall { message: String, suggested: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("covariance is rank deficient (min eigenvalue {min_eigenvalue:e})")]
    RankDeficient { min_eigenvalue: f64 },

    #[error("degenerate direction: E H^2 = {0:e}")]
    Degenerate(f64),

    #[error("positivity failure at {point:?}: min eigenvalue {min_eigenvalue:e}")]
    Positivity { point: Vec<f64>, min_eigenvalue: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("scenario error at line {line}: {message}")]
    Scenario { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
