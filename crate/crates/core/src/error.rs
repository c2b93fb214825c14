use thiserror::Error;

use crate::chebyshev::ChebyshevSolution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent p = {0} is outside the supported range (1, {max}]", max = crate::space::MAX_P)]
    ExponentOutOfRange(f64),

    #[error("cell measure at index {index} must be positive and finite, got {value}")]
    InvalidMeasure { index: usize, value: f64 },

    #[error("a weighted space needs at least one cell")]
    NoCells,

    #[error("dimension mismatch: expected {expected} coefficients, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coefficient at index {0}")]
    NonFinite(usize),

    #[error("point set must contain at least one point")]
    EmptySet,

    #[error("{0}")]
    InvalidWeights(String),

    #[error("weight count {weights} does not match point count {points}")]
    WeightCountMismatch { weights: usize, points: usize },

    #[error("{what} requires at least {needed} points, got {found}")]
    TooFewPoints {
        what: &'static str,
        needed: usize,
        found: usize,
    },

    #[error("set has zero diameter")]
    ZeroDiameter,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance too large for {oracle}: {found} points (limit {limit})")]
    InstanceTooLarge {
        oracle: &'static str,
        found: usize,
        limit: usize,
    },

    #[error(
        "solver did not reach tolerance within {} iterations (radius {}, gap estimate {})",
        .0.iterations, .0.radius, .0.gap_estimate
    )]
    NotConverged(Box<ChebyshevSolution>),

    #[error("linear subproblem failed: {0}")]
    Lp(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the caller's input rather than an internal failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::NotConverged(_) | Error::Lp(_))
    }
}
