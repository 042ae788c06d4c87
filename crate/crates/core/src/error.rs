use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Malformed or inconsistent input (shapes, ranges, preconditions).
    #[error("validation: {0}")]
    Validation(String),
    /// A statistical estimation step could not be carried out.
    #[error("estimation: {0}")]
    Estimation(String),
    /// Probability integral transform hit 0 or 1.
    #[error("transform: composite cdf value {value} at index {index} lies outside (0, 1)")]
    Transform { index: usize, value: f64 },
    /// A numerical routine failed to reach its tolerance or produced
    /// non-finite values. Carries the best available diagnostic.
    #[error("numeric: {0}")]
    Numeric(String),
    /// Requested combination is outside what the model family defines.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Parameter vector violates the family's constraint set.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// Singular or numerically rank-deficient matrix.
    #[error("singular: {0}")]
    Singular(String),
    /// Argument outside the mathematical domain of the operation.
    #[error("domain: {0}")]
    Domain(String),
    /// Optimizer failed on every start.
    #[error("optimization: {0}")]
    Optimization(String),
    /// Rejection sampler exhausted its attempt budget.
    #[error("sampling: {0}")]
    Sampling(String),
}

pub type Result<T> = std::result::Result<T, Error>;
