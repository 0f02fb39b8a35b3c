use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("exponent p must satisfy p > 1, got {0}")]
    InvalidExponent(f64),

    #[error("alpha must lie in (-1, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("density is not positive at node {index} (value {value})")]
    NonPositiveDensity { index: usize, value: f64 },

    #[error("map is not a strictly increasing bijection of [0,1]: {0}")]
    NonMonotoneMap(String),

    #[error("need at least {need} frames, got {got}")]
    TooFewFrames { need: usize, got: usize },

    #[error("time grid must be uniform and strictly increasing")]
    NonUniformTimes,

    #[error("degenerate denominator {0:e} in tau equation")]
    DegenerateDenominator(f64),

    #[error("direction is not tangent at the footpoint (defect {0:e})")]
    NotTangent(f64),

    #[error("step size must be positive, got {0}")]
    InvalidStep(f64),

    #[error("shooting failed: {0}")]
    ShootingFailed(String),

    #[error("reference direction vanishes at node {index} (|nu| = {value:e})")]
    VanishingDirection { index: usize, value: f64 },

    #[error("velocity is zero; the Finsler spray is undefined there")]
    ZeroVelocity,

    #[error("standard deviation must be positive, got {0}")]
    NonPositiveSigma(f64),

    #[error("density is not flagged as a probability density")]
    NotProbability,

    #[error("tangent field is identically zero")]
    ZeroTangent,

    #[error("{0}")]
    Format(String),
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

pub(crate) fn check_positive(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(*v > 0.0)) {
        Some(index) => Err(Error::NonPositiveDensity {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}
