//! Fourier coefficients of the return measure of an irregularly sampled path.
//!
//! For a rescaled series with left endpoints `t_i` and returns `δ_i`,
//!
//! ```text
//! c_k = (1/2π) Σ_i exp(-i k t_i) δ_i
//! ```
//!
//! The sum is evaluated directly. For each observation the phase
//! `exp(-i k t)` is advanced by one multiplication per frequency and
//! recomputed from `sin_cos` at every multiple of [`PHASE_REFRESH`], so the
//! value at a given `k` does not depend on where an evaluation range starts.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{EstimatorError, Result};
use crate::series::RescaledSeries;

/// Frequencies between exact phase evaluations.
pub const PHASE_REFRESH: usize = 64;

/// Points processed together in the inner loop.
const BLOCK: usize = 8;

/// Complex coefficients `c_k` for `k = -max_k..=max_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    max_k: usize,
    coeffs: Vec<Complex64>,
}

impl CoeffTable {
    /// Builds a table from `c_0..=c_K`, filling negative frequencies by
    /// conjugation.
    pub fn from_nonnegative(nonneg: &[Complex64]) -> Self {
        assert!(!nonneg.is_empty(), "need at least c_0");
        let max_k = nonneg.len() - 1;
        let mut coeffs = Vec::with_capacity(2 * max_k + 1);
        coeffs.extend(nonneg[1..].iter().rev().map(|c| c.conj()));
        coeffs.extend_from_slice(nonneg);
        Self { max_k, coeffs }
    }

    pub fn max_k(&self) -> usize {
        self.max_k
    }

    /// `c_k`; panics if `|k| > max_k`.
    #[inline]
    pub fn get(&self, k: i64) -> Complex64 {
        self.coeffs[(k + self.max_k as i64) as usize]
    }

    /// Coefficients ordered from `-max_k` to `max_k`.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn require(&self, max_k: usize) -> Result<()> {
        if self.max_k < max_k {
            return Err(EstimatorError::CoeffRange {
                required: max_k,
                available: self.max_k,
            });
        }
        Ok(())
    }
}

/// Fourier coefficients of the returns of `series` for `|k| <= max_k`.
pub fn return_fourier_coeffs(series: &RescaledSeries, max_k: usize) -> CoeffTable {
    let nonneg = coeffs_in_range(series, 0, max_k);
    CoeffTable::from_nonnegative(&nonneg)
}

/// `c_k` for `k_lo..=k_hi` (both nonnegative).
///
/// Results are bit-identical to the corresponding entries of
/// [`return_fourier_coeffs`], so disjoint ranges may be evaluated in parallel.
pub fn coeffs_in_range(series: &RescaledSeries, k_lo: usize, k_hi: usize) -> Vec<Complex64> {
    assert!(k_lo <= k_hi, "empty frequency range");
    let width = k_hi - k_lo + 1;
    let mut acc_re = vec![0.0_f64; width];
    let mut acc_im = vec![0.0_f64; width];

    let times = series.left_times();
    let returns = series.returns();

    for (t_block, d_block) in times.chunks(BLOCK).zip(returns.chunks(BLOCK)) {
        let m = t_block.len();
        let mut rot_re = [0.0; BLOCK];
        let mut rot_im = [0.0; BLOCK];
        let mut ph_re = [0.0; BLOCK];
        let mut ph_im = [0.0; BLOCK];
        let mut d = [0.0; BLOCK];
        for b in 0..m {
            let (s, c) = t_block[b].sin_cos();
            rot_re[b] = c;
            rot_im[b] = -s;
            d[b] = d_block[b];
            let (pr, pi) = anchored_phase(t_block[b], k_lo, c, -s);
            ph_re[b] = pr;
            ph_im[b] = pi;
        }

        for (slot, k) in (k_lo..=k_hi).enumerate() {
            if k % PHASE_REFRESH == 0 && k != k_lo {
                for b in 0..m {
                    let (s, c) = (k as f64 * t_block[b]).sin_cos();
                    ph_re[b] = c;
                    ph_im[b] = -s;
                }
            }
            let mut re = acc_re[slot];
            let mut im = acc_im[slot];
            for b in 0..m {
                re += ph_re[b] * d[b];
                im += ph_im[b] * d[b];
            }
            acc_re[slot] = re;
            acc_im[slot] = im;
            for b in 0..m {
                let nr = ph_re[b] * rot_re[b] - ph_im[b] * rot_im[b];
                let ni = ph_re[b] * rot_im[b] + ph_im[b] * rot_re[b];
                ph_re[b] = nr;
                ph_im[b] = ni;
            }
        }
    }

    acc_re
        .into_iter()
        .zip(acc_im)
        .map(|(re, im)| Complex64::new(re / TAU, im / TAU))
        .collect()
}

/// Phase `exp(-i k t)` as produced by the refresh-and-advance recurrence.
fn anchored_phase(t: f64, k: usize, rot_re: f64, rot_im: f64) -> (f64, f64) {
    let anchor = k - k % PHASE_REFRESH;
    let (s, c) = (anchor as f64 * t).sin_cos();
    let (mut re, mut im) = (c, -s);
    for _ in anchor..k {
        let nr = re * rot_re - im * rot_im;
        let ni = re * rot_im + im * rot_re;
        re = nr;
        im = ni;
    }
    (re, im)
}
