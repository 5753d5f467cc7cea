//! Monte Carlo studies of the estimator: uniform consistency of the spot
//! estimate, the CLT for weighted integrals, the MSE-versus-cutoff tradeoff
//! and the Epps effect.
//!
//! Every replication draws its randomness from a seed derived from the
//! master seed and the replication's coordinates, and results are collected
//! in replication order, so reports do not depend on the worker count.

mod clt;
mod consistency;
mod epps;
mod mse;
mod report;
mod test_function;

use std::f64::consts::TAU;

use fouriervol_core::{rescale_time, select_cutoff_bounded, RescaledSeries, TickSeries};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::simulate::{SamplingKind, MAX_STEP};

pub use clt::{clt_study, CltConfig};
pub use consistency::{consistency_study, ConsistencyConfig};
pub use epps::{epps_study, previous_tick_cell, EppsConfig, FOURIER_CELL, HY_CELL};
pub use mse::{mse_sweep, CutoffGrid, MseConfig, UpperCutoff};
pub use report::{
    mean, median, quantile, sample_variance, summarize, CellSummary, Check, ExperimentReport, Record,
    StudyKind,
};
pub use test_function::TestFunction;

/// Environment variable capping the worker count of a study.
pub const THREADS_ENV: &str = "FOURIERVOL_THREADS";

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for the unit of work at `path` under `master`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Worker cap from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `f(0..count)` on a pool of `threads` workers (or the environment cap,
/// or rayon's default) and returns the results in index order.
pub fn run_indexed<T, F>(count: usize, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.or_else(thread_cap_from_env) {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| SimError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

/// How a study chooses the cutoff `N` from the realized sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffRule {
    /// `round(ρ^(-2/3))`, clamped to `[1, (n-1)/2]`.
    Auto,
    /// `(n-1)/2`, the largest cutoff with `2N+1 <= n`.
    Nyquist,
    Fixed(usize),
}

impl CutoffRule {
    pub fn resolve(self, mesh: f64, n_returns: usize) -> Result<usize> {
        match self {
            CutoffRule::Auto => Ok(select_cutoff_bounded(mesh, n_returns)?),
            CutoffRule::Nyquist => Ok((n_returns.saturating_sub(1) / 2).max(1)),
            CutoffRule::Fixed(n) => Ok(n),
        }
    }
}

/// Sampling family parametrized by the nominal number of intervals `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeFamily {
    Even,
    Jittered,
    /// Poisson arrivals with intensity `n / 2π`.
    Poisson,
}

impl SchemeFamily {
    pub fn at(self, n: usize) -> SamplingKind {
        match self {
            SchemeFamily::Even => SamplingKind::Even { n },
            SchemeFamily::Jittered => SamplingKind::Jittered { n },
            SchemeFamily::Poisson => SamplingKind::Poisson {
                intensity: n as f64 / TAU,
            },
        }
    }
}

/// Fine-grid step used to simulate a path observed under `kind`.
///
/// Even grids are refined by an integer factor so observation times fall on
/// fine nodes; other schemes get 64 fine steps per expected interval, which
/// keeps the previous-tick lag of an observation below `ρ/64`.
pub fn fine_step(kind: SamplingKind) -> f64 {
    let steps = match kind {
        SamplingKind::Even { n } => n * 2.max(1000usize.div_ceil(n)),
        other => ((64.0 * other.expected_intervals()).ceil() as usize).max(1000),
    };
    (TAU / steps as f64).min(MAX_STEP)
}

pub(crate) fn rescale_all(series: &[TickSeries]) -> Result<Vec<RescaledSeries>> {
    series
        .iter()
        .map(|s| rescale_time(s, (0.0, TAU)).map_err(SimError::from))
        .collect()
}

/// Study configuration tagged by kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "study", rename_all = "snake_case")]
pub enum StudyConfig {
    Consistency(ConsistencyConfig),
    Clt(CltConfig),
    MseSweep(MseConfig),
    Epps(EppsConfig),
}

impl StudyConfig {
    pub fn set_threads(&mut self, threads: Option<usize>) {
        match self {
            StudyConfig::Consistency(c) => c.threads = threads,
            StudyConfig::Clt(c) => c.threads = threads,
            StudyConfig::MseSweep(c) => c.threads = threads,
            StudyConfig::Epps(c) => c.threads = threads,
        }
    }
}

pub fn run_study(config: &StudyConfig) -> Result<ExperimentReport> {
    match config {
        StudyConfig::Consistency(c) => consistency_study(c),
        StudyConfig::Clt(c) => clt_study(c),
        StudyConfig::MseSweep(c) => mse_sweep(c),
        StudyConfig::Epps(c) => epps_study(c),
    }
}

/// Sample skewness and excess kurtosis (population moments).
pub fn shape_moments(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    let n = xs.len() as f64;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
