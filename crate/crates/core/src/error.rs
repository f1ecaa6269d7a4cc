use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension error: {what} requires N >= {min}, got N = {dim}")]
    Dimension {
        what: &'static str,
        min: usize,
        dim: usize,
    },

    #[error("V' is singular at r = R = {radius} for alpha = {alpha} (one-sided values {left:?}, {right:?})")]
    SingularPoint {
        radius: f64,
        alpha: f64,
        left: Option<f64>,
        right: Option<f64>,
    },

    #[error("solver did not converge after {iterations} iterations (gradient norm {gradient_norm:e}, quotient {quotient})")]
    NonConvergence {
        iterations: usize,
        gradient_norm: f64,
        quotient: f64,
    },

    #[error("weighted integral underflows on this grid (alpha = {alpha}); refine the grid near the weight's support")]
    DegenerateWeight { alpha: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
