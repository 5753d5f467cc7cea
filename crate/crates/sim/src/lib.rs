//! Simulated tick data with known volatility paths, and Monte Carlo studies
//! of the Fourier estimators built on it.

pub mod error;
pub mod experiments;
pub mod simulate;

pub use error::{Result, SimError};
pub use experiments::{
    clt_study, consistency_study, epps_study, mse_sweep, run_study, CltConfig, ConsistencyConfig, CutoffGrid,
    CutoffRule, EppsConfig, ExperimentReport, MseConfig, Record, SchemeFamily, StudyConfig, StudyKind,
    TestFunction, UpperCutoff,
};
pub use simulate::{
    add_noise, draw_times, h_n_statistic, sample_path, simulate_path, AssetModel, FinePath, ModelKind, ModelSpec,
    NoiseSpec, SamplingKind, SamplingScheme, VolSpec,
};
