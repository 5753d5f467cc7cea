//! Weight functions `h` for the CLT statistic `∫ h (σ̂² - σ²) dt`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Trapezoid nodes used for the Fourier coefficients of `h`.
const QUADRATURE_POINTS: usize = 8192;

/// Coefficients below this fraction of `|c_0(h)|` are treated as zero.
const COEFF_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// `exp(-1/(1-u²))` with `u = (t - π)/(3π/4)`, zero outside `[π/4, 7π/4]`.
    #[default]
    Bump,
    Zero,
}

impl TestFunction {
    pub const SUPPORT: (f64, f64) = (PI / 4.0, 7.0 * PI / 4.0);

    pub fn eval(self, t: f64) -> f64 {
        match self {
            TestFunction::Zero => 0.0,
            TestFunction::Bump => {
                let u = (t - PI) / (0.75 * PI);
                if u.abs() < 1.0 {
                    (-1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Hölder exponent available to the regime conditions.
    pub fn holder_alpha(self) -> f64 {
        1.0
    }

    /// `c_k(h) = (1/2π) ∫ h(t) e^{-ikt} dt` for `k = 0..=max_k`.
    pub fn fourier_coeffs(self, max_k: usize) -> Vec<Complex64> {
        let m = QUADRATURE_POINTS;
        let h = TAU / m as f64;
        let samples: Vec<(f64, f64)> = (0..m)
            .map(|j| {
                let t = j as f64 * h;
                (t, self.eval(t))
            })
            .filter(|&(_, v)| v != 0.0)
            .collect();
        (0..=max_k)
            .map(|k| {
                let sum: Complex64 = samples
                    .iter()
                    .map(|&(t, v)| Complex64::from_polar(v, -(k as f64) * t))
                    .sum();
                sum * (h / TAU)
            })
            .collect()
    }

    /// Coefficients up to the last index whose modulus exceeds the floor,
    /// searching no further than `limit`.
    pub fn significant_coeffs(self, limit: usize) -> Vec<Complex64> {
        let all = self.fourier_coeffs(limit);
        let floor = COEFF_FLOOR * all[0].norm();
        let last = all.iter().rposition(|c| c.norm() > floor).unwrap_or(0);
        all[..=last].to_vec()
    }

    /// Fejér smoothing `h_N(t) = Σ_{|k|<N} (1 - |k|/N) c_k(h) e^{ikt}`.
    pub fn fejer_smoothed(self, coeffs: &[Complex64], n_freq: usize, t: f64) -> f64 {
        let top = n_freq.min(coeffs.len());
        let mut acc = 0.0;
        for (k, c) in coeffs.iter().enumerate().take(top) {
            let w = 1.0 - k as f64 / n_freq as f64;
            let term = (c * Complex64::from_polar(1.0, k as f64 * t)).re;
            acc += if k == 0 { w * term } else { 2.0 * w * term };
        }
        acc
    }
}
