//! Error taxonomy shared across the crate.
//!
//! Numeric routines distinguish bad inputs (domain violations, malformed
//! operators) from genuine numerical failures (unbracketed roots, iteration
//! caps). Callers that drive solvers programmatically match on the variant.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{name} must be finite and nonnegative, got {value}")]
    NonNegative { name: &'static str, value: f64 },

    #[error("{name} must be finite and positive, got {value}")]
    Positive { name: &'static str, value: f64 },

    #[error("{name} = {value} lies outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("root of {context} is not bracketed on [{lo:.6e}, {hi:.6e}]")]
    NotBracketed {
        context: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("{context}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        context: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("{0}")]
    InvalidState(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidState(msg.into())
    }
}

/// Reject non-finite or negative values.
pub(crate) fn check_nonneg(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::NonNegative { name, value })
    }
}

/// Reject non-finite or non-positive values.
pub(crate) fn check_pos(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Positive { name, value })
    }
}

/// Reject values outside a closed interval.
pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            lo,
            hi,
        })
    }
}
