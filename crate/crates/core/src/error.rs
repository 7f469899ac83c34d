use alloc::string::String;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A structural hypothesis (sign of a rate, position of a stationary point) fails.
    #[error("assumption violated: {0}")]
    Assumption(String),
    /// Integration, quadrature or iteration did not deliver a trustworthy number.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Limit extrapolation disagreed with itself.
    #[error("estimation error: {0}")]
    Estimation(String),
    /// Malformed sampled data.
    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T> = core::result::Result<T, Error>;
