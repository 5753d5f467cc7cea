use thiserror::Error;

use fouriervol_core::EstimatorError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("ModelError: {0}")]
    Model(String),

    #[error("ResampleError: asset {asset} has {count} arrivals in the window, need at least 2")]
    Resample { asset: usize, count: usize },

    #[error("ConfigError: {0}")]
    Config(String),

    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

pub type Result<T> = std::result::Result<T, SimError>;
