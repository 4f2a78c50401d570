use thiserror::Error;

/// Errors raised by the estimators and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no dominant direction: the matrix maps the iterate to zero")]
    NoDominantDirection,

    #[error("truncation annihilated the vector")]
    TruncationAnnihilated,

    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e}, scale {scale:.3e})")]
    NotSymmetric { asymmetry: f64, scale: f64 },

    #[error(
        "eigengap phi = {phi:.6e} is not positive; the difference estimator M cannot \
         separate beta*, use the sum-type estimator M' instead"
    )]
    NonPositiveGap { phi: f64 },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by the data or the iteration rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoDominantDirection
                | Error::TruncationAnnihilated
                | Error::NonPositiveGap { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
