//! Reference estimators: realized variance, previous-tick realized
//! covariance and the Hayashi–Yoshida overlap estimator.

use crate::error::{EstimatorError, Result};
use crate::series::{RescaledSeries, TickSeries};

/// Sum of squared returns.
pub fn realized_variance(series: &RescaledSeries) -> f64 {
    series.returns().iter().map(|d| d * d).sum()
}

/// Previous-tick synchronization grid with step `grid_step` on the raw clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncSpec {
    pub grid_step: f64,
}

impl SyncSpec {
    pub fn new(grid_step: f64) -> Self {
        Self { grid_step }
    }
}

/// Relative slack when counting grid intervals, so that `window / Δ` landing a
/// hair below an integer still yields that integer.
const GRID_SLACK: f64 = 1e-9;

/// Price in force at `t`: the last observation at or before `t`, or the first
/// observation when `t` precedes all of them.
fn previous_tick(series: &TickSeries, t: f64, slack: f64) -> f64 {
    let idx = series.times.partition_point(|&s| s <= t + slack);
    series.log_prices[idx.saturating_sub(1)]
}

fn check_ticks(series: &TickSeries) -> Result<()> {
    if series.times.len() != series.log_prices.len() {
        return Err(EstimatorError::LengthMismatch {
            times: series.times.len(),
            prices: series.log_prices.len(),
        });
    }
    if series.is_empty() {
        return Err(EstimatorError::EmptySeries(0));
    }
    for (index, w) in series.times.windows(2).enumerate() {
        if w[1] < w[0] {
            return Err(EstimatorError::UnorderedInput {
                index: index + 1,
                prev: w[0],
                next: w[1],
            });
        }
    }
    Ok(())
}

/// Realized covariance after previous-tick resampling on the grid
/// `start + kΔ`, where `start` is the earliest first observation of the two
/// series and the grid runs while it stays within the latest last observation.
pub fn realized_covariance_previous_tick(s1: &TickSeries, s2: &TickSeries, sync: SyncSpec) -> Result<f64> {
    check_ticks(s1)?;
    check_ticks(s2)?;
    let (a1, b1) = s1.span().expect("nonempty");
    let (a2, b2) = s2.span().expect("nonempty");
    let start = a1.min(a2);
    let window = b1.max(b2) - start;
    let step = sync.grid_step;
    if !(step.is_finite() && step > 0.0) || !(window > 0.0) {
        return Err(EstimatorError::DegenerateGrid { step, window });
    }
    let intervals = (window / step + GRID_SLACK).floor() as usize;
    if intervals == 0 {
        return Err(EstimatorError::DegenerateGrid { step, window });
    }

    let slack = GRID_SLACK * step;
    let mut prev1 = previous_tick(s1, start, slack);
    let mut prev2 = previous_tick(s2, start, slack);
    let mut total = 0.0;
    for k in 1..=intervals {
        let g = start + k as f64 * step;
        let p1 = previous_tick(s1, g, slack);
        let p2 = previous_tick(s2, g, slack);
        total += (p1 - prev1) * (p2 - prev2);
        prev1 = p1;
        prev2 = p2;
    }
    Ok(total)
}

/// Hayashi–Yoshida estimator: sum of return cross-products over all pairs of
/// half-open intervals `[t_i, t_{i+1})`, `[u_j, u_{j+1})` that intersect.
///
/// Single merge-style sweep, `O(n₁ + n₂)`.
pub fn hayashi_yoshida(s1: &RescaledSeries, s2: &RescaledSeries) -> Result<f64> {
    s1.ensure_same_window(s2)?;
    let (t, d) = (s1.times(), s1.returns());
    let (u, e) = (s2.times(), s2.returns());
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    while i < d.len() && j < e.len() {
        if t[i].max(u[j]) < t[i + 1].min(u[j + 1]) {
            total += d[i] * e[j];
        }
        // The interval that ends first cannot meet anything further along.
        if t[i + 1] < u[j + 1] {
            i += 1;
        } else if u[j + 1] < t[i + 1] {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    Ok(total)
}

/// [`hayashi_yoshida`] by scanning every pair of intervals, `O(n₁ n₂)`.
pub fn hayashi_yoshida_brute_force(s1: &RescaledSeries, s2: &RescaledSeries) -> Result<f64> {
    s1.ensure_same_window(s2)?;
    let (t, d) = (s1.times(), s1.returns());
    let (u, e) = (s2.times(), s2.returns());
    let mut total = 0.0;
    for i in 0..d.len() {
        for j in 0..e.len() {
            if t[i].max(u[j]) < t[i + 1].min(u[j + 1]) {
                total += d[i] * e[j];
            }
        }
    }
    Ok(total)
}
