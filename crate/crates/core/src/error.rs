//! Crate-wide error type.

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid construction parameters (non-stochastic rows, bad sigma, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Pair of laws for which the requested metric is not defined here.
    #[error("unsupported pair: {0}")]
    UnsupportedPair(String),

    /// Enumeration would exceed the configured size cap.
    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    /// Quadrature or iteration failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
