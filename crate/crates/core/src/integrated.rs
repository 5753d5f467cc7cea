//! Integrated volatility and co-volatility over the whole window.

use std::f64::consts::TAU;

use crate::convolution::convolution_coeffs;
use crate::error::{EstimatorError, Result};
use crate::fourier::{return_fourier_coeffs, CoeffTable};
use crate::series::RescaledSeries;

/// Rescaled Dirichlet kernel `D_N(t) = (1/(2N+1)) Σ_{|s|≤N} e^{ist}`.
///
/// Uses the closed form `sin((N+1/2)t) / ((2N+1) sin(t/2))` away from
/// multiples of 2π and the cosine sum near them.
pub fn dirichlet_kernel(n_freq: usize, t: f64) -> f64 {
    // Reduce to (-π, π] so that sin(t/2) is accurate near multiples of 2π.
    let mut u = t.rem_euclid(TAU);
    if u > std::f64::consts::PI {
        u -= TAU;
    }
    let m = (2 * n_freq + 1) as f64;
    let half = (0.5 * u).sin();
    let value = if half.abs() > 1e-8 {
        ((n_freq as f64 + 0.5) * u).sin() / (m * half)
    } else {
        let tail: f64 = (1..=n_freq).map(|s| (s as f64 * u).cos()).sum();
        (1.0 + 2.0 * tail) / m
    };
    value.clamp(-1.0, 1.0)
}

/// `(2π)²/(2N+1) Σ_{|s|≤N} c_s c_{-s}`, i.e. `2π α_0` of the series with itself.
pub fn integrated_volatility(c: &CoeffTable, n_freq: usize) -> Result<f64> {
    c.require(n_freq)?;
    let energy: f64 = c.get(0).norm_sqr()
        + 2.0 * (1..=n_freq as i64).map(|s| c.get(s).norm_sqr()).sum::<f64>();
    Ok(TAU * TAU / (2 * n_freq + 1) as f64 * energy)
}

/// Prefactor of the Fejér-weighted integrated estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FejerNormalization {
    /// `(2π)²/(N+1)`.
    #[default]
    NPlusOne,
    /// `(2π)²/(2N+1)`, the normalization of the unweighted estimator.
    TwoNPlusOne,
}

/// `(2π)²/(N+1) Σ_{|s|≤N} (1 - |s|/N) c_s c_{-s}` (or the `2N+1` variant).
pub fn integrated_volatility_fejer(
    c: &CoeffTable,
    n_freq: usize,
    normalization: FejerNormalization,
) -> Result<f64> {
    if n_freq == 0 {
        return Err(EstimatorError::InvalidCutoff(
            "Fejér-weighted integrated volatility needs N >= 1".into(),
        ));
    }
    c.require(n_freq)?;
    let n = n_freq as f64;
    let weighted: f64 = c.get(0).norm_sqr()
        + 2.0
            * (1..=n_freq as i64)
                .map(|s| (1.0 - s as f64 / n) * c.get(s).norm_sqr())
                .sum::<f64>();
    let denom = match normalization {
        FejerNormalization::NPlusOne => n + 1.0,
        FejerNormalization::TwoNPlusOne => 2.0 * n + 1.0,
    };
    Ok(TAU * TAU / denom * weighted)
}

/// Integrated co-volatility `2π α_0` from the two return-coefficient tables.
pub fn integrated_covolatility(s1: &RescaledSeries, s2: &RescaledSeries, n_freq: usize) -> Result<f64> {
    s1.ensure_same_window(s2)?;
    let c1 = return_fourier_coeffs(s1, n_freq);
    let c2 = return_fourier_coeffs(s2, n_freq);
    integrated_covolatility_from_coeffs(&c1, &c2, n_freq)
}

/// `2π α_0(c1, c2)` for precomputed tables reaching at least `n_freq`.
pub fn integrated_covolatility_from_coeffs(c1: &CoeffTable, c2: &CoeffTable, n_freq: usize) -> Result<f64> {
    let alpha = convolution_coeffs(c1, c2, n_freq, 0)?;
    Ok(TAU * alpha.get(0).re)
}

/// Integrated co-volatility as the kernel-weighted sum of return
/// cross-products `Σ_i Σ_j D_N(t¹_i - t²_j) δ¹_i δ²_j`.
///
/// Costs `O(n₁ n₂)`; mainly an independent check of
/// [`integrated_covolatility`].
pub fn integrated_covolatility_dirichlet(
    s1: &RescaledSeries,
    s2: &RescaledSeries,
    n_freq: usize,
) -> Result<f64> {
    s1.ensure_same_window(s2)?;
    let mut total = 0.0;
    for (&ti, &di) in s1.left_times().iter().zip(s1.returns()) {
        if di == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for (&tj, &dj) in s2.left_times().iter().zip(s2.returns()) {
            row += dirichlet_kernel(n_freq, ti - tj) * dj;
        }
        total += di * row;
    }
    Ok(total)
}

/// Cutoff balancing the discretization and convolution error bounds:
/// `N = round(ρ^(-2/3))`, at least 1.
pub fn select_cutoff(mesh: f64) -> Result<usize> {
    if !(mesh.is_finite() && mesh > 0.0 && mesh <= TAU) {
        return Err(EstimatorError::InvalidMesh(mesh));
    }
    let n = (mesh.powf(-2.0 / 3.0) + 0.5).floor() as usize;
    Ok(n.max(1))
}

/// [`select_cutoff`] clamped to `[1, (n_returns - 1) / 2]`, the largest
/// cutoff whose `2N + 1` frequencies do not exceed the number of returns.
pub fn select_cutoff_bounded(mesh: f64, n_returns: usize) -> Result<usize> {
    let n = select_cutoff(mesh)?;
    let cap = (n_returns.saturating_sub(1) / 2).max(1);
    Ok(n.min(cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{rescale_time, TickSeries};
    use rand::{Rng, SeedableRng};

    fn even_series(n: usize, seed: u64) -> RescaledSeries {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let times: Vec<f64> = (0..=n).map(|j| j as f64).collect();
        let mut p = 0.0;
        let prices = (0..=n)
            .map(|_| {
                let v = p;
                p += rng.gen_range(-0.01..0.01);
                v
            })
            .collect();
        rescale_time(&TickSeries::new("x", times, prices).unwrap(), (0.0, n as f64)).unwrap()
    }

    #[test]
    fn dirichlet_basic_values() {
        for n in [0, 1, 7, 300] {
            assert_eq!(dirichlet_kernel(n, 0.0), 1.0);
            assert!((dirichlet_kernel(n, TAU) - 1.0).abs() < 1e-12);
        }
        // (1/3)(e^{-iπ} + 1 + e^{iπ}) = -1/3
        assert!((dirichlet_kernel(1, std::f64::consts::PI) + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_matches_exponential_sum() {
        for n in [1_usize, 4, 33] {
            for t in [1e-12, 1e-7, 0.3, 2.0, -1.1, TAU - 1e-9, 17.0] {
                let direct: f64 = (-(n as i64)..=n as i64)
                    .map(|s| (s as f64 * t).cos())
                    .sum::<f64>()
                    / (2 * n + 1) as f64;
                let d = dirichlet_kernel(n, t);
                assert!((d - direct).abs() < 1e-12, "N = {n}, t = {t}: {d} vs {direct}");
                assert!(d.abs() <= 1.0);
            }
        }
    }

    #[test]
    fn zero_cutoff_is_squared_total_return() {
        let s = even_series(50, 1);
        let c = return_fourier_coeffs(&s, 0);
        let p = s.log_prices();
        let total = p[p.len() - 1] - p[0];
        let v = integrated_volatility(&c, 0).unwrap();
        assert!((v - total * total).abs() < 1e-14);
    }

    #[test]
    fn nyquist_cutoff_is_realized_variance() {
        for n in [11, 101, 1001] {
            let s = even_series(n, n as u64);
            let c = return_fourier_coeffs(&s, (n - 1) / 2);
            let v = integrated_volatility(&c, (n - 1) / 2).unwrap();
            let rv: f64 = s.returns().iter().map(|d| d * d).sum();
            assert!((v - rv).abs() <= 1e-10 * rv, "n = {n}: {v} vs {rv}");
        }
    }

    #[test]
    fn dirichlet_vanishes_on_nonzero_grid_lags() {
        // The Nyquist identity above rests on D_N(2πm/n) = 0 for 2N+1 = n.
        let n = 101;
        for m in 1..n {
            let d = dirichlet_kernel((n - 1) / 2, TAU * m as f64 / n as f64);
            assert!(d.abs() < 1e-13, "m = {m}: {d}");
        }
    }

    #[test]
    fn fejer_variant_single_term_and_zero_cutoff() {
        let mut nonneg = vec![num_complex::Complex64::new(0.0, 0.0); 5];
        nonneg[0].re = 0.2;
        let c = CoeffTable::from_nonnegative(&nonneg);
        let v = integrated_volatility_fejer(&c, 4, FejerNormalization::NPlusOne).unwrap();
        assert!((v - TAU * TAU / 5.0 * 0.04).abs() < 1e-15);
        let w = integrated_volatility_fejer(&c, 4, FejerNormalization::TwoNPlusOne).unwrap();
        assert!((w - TAU * TAU / 9.0 * 0.04).abs() < 1e-15);
        assert!(matches!(
            integrated_volatility_fejer(&c, 0, FejerNormalization::NPlusOne),
            Err(EstimatorError::InvalidCutoff(_))
        ));
    }

    #[test]
    fn covolatility_collapses_to_volatility_on_diagonal() {
        let s = even_series(120, 4);
        let c = return_fourier_coeffs(&s, 20);
        let v = integrated_volatility(&c, 20).unwrap();
        let cv = integrated_covolatility(&s, &s, 20).unwrap();
        assert!((v - cv).abs() < 1e-13 * v);
    }

    #[test]
    fn window_mismatch_is_rejected() {
        let a = rescale_time(&TickSeries::new("a", vec![0.0, 1.0], vec![0.0, 1.0]).unwrap(), (0.0, 1.0))
            .unwrap();
        let b = rescale_time(&TickSeries::new("b", vec![0.0, 1.0], vec![0.0, 1.0]).unwrap(), (0.0, 2.0))
            .unwrap();
        assert!(matches!(
            integrated_covolatility(&a, &b, 3),
            Err(EstimatorError::WindowMismatch { .. })
        ));
        assert!(matches!(
            integrated_covolatility_dirichlet(&a, &b, 3),
            Err(EstimatorError::WindowMismatch { .. })
        ));
    }

    #[test]
    fn cutoff_rule() {
        assert_eq!(select_cutoff(1.0).unwrap(), 1);
        assert_eq!(select_cutoff(1e-3).unwrap(), 100);
        // (2π/1000)^(-2/3) = 29.37...
        assert_eq!(select_cutoff(TAU / 1000.0).unwrap(), 29);
        assert_eq!(select_cutoff(TAU).unwrap(), 1);
        assert_eq!(select_cutoff(0.0), Err(EstimatorError::InvalidMesh(0.0)));
        assert!(select_cutoff(-1.0).is_err());
        assert!(select_cutoff(f64::NAN).is_err());
        assert_eq!(select_cutoff_bounded(1e-3, 11).unwrap(), 5);
        assert_eq!(select_cutoff_bounded(1e-3, 2).unwrap(), 1);
    }
}
