//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by kernels, estimators, samplers, and models.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value from {context} at point {point:?}")]
    NonFinite { context: &'static str, point: Vec<f64> },

    #[error("gram matrix not factorizable after jitter escalation (last jitter {jitter:.3e})")]
    SingularGram { jitter: f64 },

    #[error("degenerate coefficient: c(z) = {value:.6} <= 0 at z = {z:.6} for x1 = {x1:.6}")]
    DegenerateCoefficient { z: f64, x1: f64, value: f64 },

    #[error("trajectory failure at t = {t:.6}: {reason}")]
    Trajectory { t: f64, reason: &'static str },

    #[error("target density provides no log-density; required for MCMC")]
    MissingLogDensity,

    #[error("sobol dimension {dim} exceeds supported table dimension {max}")]
    SobolDimension { dim: usize, max: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
