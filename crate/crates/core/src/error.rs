use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the engine can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("time {t} outside trajectory range [0, {t_end}]")]
    OutOfRange { t: f64, t_end: f64 },

    #[error("(eps, eps_dot) violates the Wronskian invariant: |Im(eps conj(eps_dot)) + 1| = {residual:e}")]
    Wronskian { residual: f64 },

    #[error("grid does not cover the state: {0}")]
    Coverage(String),

    #[error("odd cat state needs |alpha| > {min:e}, got {abs_alpha:e}")]
    DegenerateNormalization { abs_alpha: f64, min: f64 },

    #[error("degenerate reference frame: mu and nu are both zero")]
    DegenerateFrame,

    #[error("non-positive quadrature variance {0:e}")]
    NonPositiveVariance(f64),

    #[error("normalization convention check failed: {0}")]
    Convention(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid tomogram family: {0}")]
    Family(String),

    #[error("invalid tomogram field: {0}")]
    Field(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
