use thiserror::Error;

/// Errors raised by the estimator core and the reference estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("EmptySeries: need at least 2 distinct observations, got {0}")]
    EmptySeries(usize),

    #[error("UnorderedInput: time {next} at index {index} precedes {prev}")]
    UnorderedInput { index: usize, prev: f64, next: f64 },

    #[error("OutOfWindow: observation time {time} lies outside window [{start}, {end}]")]
    OutOfWindow { time: f64, start: f64, end: f64 },

    #[error("InvalidWindow: window start {start} must be finite and precede end {end}")]
    InvalidWindow { start: f64, end: f64 },

    #[error("LengthMismatch: {times} times but {prices} log-prices")]
    LengthMismatch { times: usize, prices: usize },

    #[error("NonFinite: {what} contains a non-finite value")]
    NonFinite { what: &'static str },

    #[error("CoeffRangeError: coefficient table has max_k = {available}, need at least {required}")]
    CoeffRange { required: usize, available: usize },

    #[error("InvalidCutoff: {0}")]
    InvalidCutoff(String),

    #[error("InvalidMesh: mesh must be a finite value in (0, 2*pi], got {0}")]
    InvalidMesh(f64),

    #[error("InvalidGrid: evaluation time {0} lies outside [0, 2*pi]")]
    InvalidGrid(f64),

    #[error("WindowMismatch: series rescaled from {left:?} and {right:?}")]
    WindowMismatch { left: (f64, f64), right: (f64, f64) },

    #[error("NumericalInconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("DegenerateGrid: sync step {step} leaves no full interval in a window of length {window}")]
    DegenerateGrid { step: f64, window: f64 },
}

pub type Result<T> = std::result::Result<T, EstimatorError>;
