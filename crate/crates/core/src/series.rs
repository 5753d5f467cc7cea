//! Tick series on the raw clock and their image on the circle `[0, 2π]`.

use std::f64::consts::TAU;

use crate::error::{EstimatorError, Result};

/// Observed log-prices of one asset on the raw clock.
///
/// Times are expected to be nondecreasing; repeated timestamps are allowed and
/// are resolved by [`rescale_time`].
#[derive(Debug, Clone, PartialEq)]
pub struct TickSeries {
    pub asset_id: String,
    pub times: Vec<f64>,
    pub log_prices: Vec<f64>,
}

impl TickSeries {
    pub fn new(asset_id: impl Into<String>, times: Vec<f64>, log_prices: Vec<f64>) -> Result<Self> {
        if times.len() != log_prices.len() {
            return Err(EstimatorError::LengthMismatch {
                times: times.len(),
                prices: log_prices.len(),
            });
        }
        Ok(Self {
            asset_id: asset_id.into(),
            times,
            log_prices,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Smallest and largest timestamp, if any.
    pub fn span(&self) -> Option<(f64, f64)> {
        Some((*self.times.first()?, *self.times.last()?))
    }
}

/// Observations mapped affinely onto `[0, 2π]` with precomputed returns.
///
/// The first time is always `0` and the last is always `2π`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledSeries {
    times: Vec<f64>,
    log_prices: Vec<f64>,
    returns: Vec<f64>,
    origin_window: (f64, f64),
    mesh: f64,
}

/// Rescaled times closer than this (relative to 2π) to a window endpoint are
/// snapped onto it.
const SNAP_TOLERANCE: f64 = 1e-12;

/// Maps `series` from `window` onto `[0, 2π]`.
///
/// Repeated timestamps collapse to one observation carrying the last price.
/// If the first (last) observation does not sit on the window boundary, a
/// flat observation at `0` (`2π`) carrying the first (last) price is added,
/// which contributes a zero return.
pub fn rescale_time(series: &TickSeries, window: (f64, f64)) -> Result<RescaledSeries> {
    let (start, end) = window;
    if !(start.is_finite() && end.is_finite() && start < end) {
        return Err(EstimatorError::InvalidWindow { start, end });
    }
    if series.times.len() != series.log_prices.len() {
        return Err(EstimatorError::LengthMismatch {
            times: series.times.len(),
            prices: series.log_prices.len(),
        });
    }
    if series.len() < 2 {
        return Err(EstimatorError::EmptySeries(series.len()));
    }
    if series.log_prices.iter().any(|p| !p.is_finite()) {
        return Err(EstimatorError::NonFinite { what: "log_prices" });
    }
    for (index, pair) in series.times.windows(2).enumerate() {
        if !pair[1].is_finite() || !pair[0].is_finite() {
            return Err(EstimatorError::NonFinite { what: "times" });
        }
        if pair[1] < pair[0] {
            return Err(EstimatorError::UnorderedInput {
                index: index + 1,
                prev: pair[0],
                next: pair[1],
            });
        }
    }

    let scale = TAU / (end - start);
    let slack = SNAP_TOLERANCE * TAU;
    let mut times: Vec<f64> = Vec::with_capacity(series.len() + 2);
    let mut prices: Vec<f64> = Vec::with_capacity(series.len() + 2);
    for (&t, &p) in series.times.iter().zip(&series.log_prices) {
        let mut u = (t - start) * scale;
        if u < -slack || u > TAU + slack {
            return Err(EstimatorError::OutOfWindow { time: t, start, end });
        }
        if u.abs() <= slack {
            u = 0.0;
        } else if (u - TAU).abs() <= slack {
            u = TAU;
        }
        match times.last() {
            // Same instant: the later print wins.
            Some(&last) if last == u => *prices.last_mut().expect("aligned") = p,
            _ => {
                times.push(u);
                prices.push(p);
            }
        }
    }
    if times.len() < 2 {
        return Err(EstimatorError::EmptySeries(times.len()));
    }

    if times[0] > 0.0 {
        times.insert(0, 0.0);
        prices.insert(0, prices[0]);
    }
    if *times.last().expect("nonempty") < TAU {
        let last = *prices.last().expect("nonempty");
        times.push(TAU);
        prices.push(last);
    }

    let returns: Vec<f64> = prices.windows(2).map(|w| w[1] - w[0]).collect();
    let mesh = times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0_f64, f64::max);

    Ok(RescaledSeries {
        times,
        log_prices: prices,
        returns,
        origin_window: window,
        mesh,
    })
}

impl RescaledSeries {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn log_prices(&self) -> &[f64] {
        &self.log_prices
    }

    /// `returns[i] = log_prices[i + 1] - log_prices[i]`.
    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    /// Left endpoints of the return intervals, i.e. all times except the last.
    pub fn left_times(&self) -> &[f64] {
        &self.times[..self.returns.len()]
    }

    pub fn origin_window(&self) -> (f64, f64) {
        self.origin_window
    }

    /// Largest gap between consecutive times.
    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    /// Number of return intervals.
    pub fn n_returns(&self) -> usize {
        self.returns.len()
    }

    /// Maps a rescaled time back to the raw clock.
    pub fn to_raw_time(&self, t: f64) -> f64 {
        let (start, end) = self.origin_window;
        start + t * (end - start) / TAU
    }

    /// Errors unless both series were rescaled from the same raw window.
    pub fn ensure_same_window(&self, other: &RescaledSeries) -> Result<()> {
        if self.origin_window != other.origin_window {
            return Err(EstimatorError::WindowMismatch {
                left: self.origin_window,
                right: other.origin_window,
            });
        }
        Ok(())
    }
}
