//! Reconstruction of the spot (co-)volatility path by Fejér summation.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::convolution::AlphaTable;
use crate::error::{EstimatorError, Result};
use crate::fourier::CoeffTable;

/// Default number of evaluation points for a spot curve.
pub const DEFAULT_GRID_POINTS: usize = 256;

/// Allowed imaginary residue of the Fejér sum, relative to `1 + |re|`.
pub const IMAG_TOLERANCE: f64 = 1e-9;

/// Allowed negative excursion of the positive variant, relative to its scale.
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpotVariant {
    /// Fejér sum of the convolution coefficients `α_k`.
    FejerCanonical,
    /// Fejér sum of the doubly truncated convolution; nonnegative on diagonals.
    FejerPositive,
}

impl SpotVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            SpotVariant::FejerCanonical => "fejer_canonical",
            SpotVariant::FejerPositive => "fejer_positive",
        }
    }
}

impl fmt::Display for SpotVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Spot estimates on an evaluation grid in `[0, 2π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpotCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub n_freq: usize,
    pub variant: SpotVariant,
}

/// `points` evenly spaced times in `[0, 2π)`.
pub fn default_grid(points: usize) -> Vec<f64> {
    (0..points).map(|m| TAU * m as f64 / points as f64).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    match grid.iter().find(|t| !(0.0..=TAU).contains(*t)) {
        Some(&t) => Err(EstimatorError::InvalidGrid(t)),
        None => Ok(()),
    }
}

#[inline]
fn fejer_weight(k: i64, n_freq: usize) -> f64 {
    1.0 - k.unsigned_abs() as f64 / n_freq as f64
}

/// `Σ_{|k|<N} (1 - |k|/N) α_k e^{ikt}` at each grid point.
///
/// The full complex sum is formed; an imaginary part above
/// [`IMAG_TOLERANCE`] means the coefficient table is not conjugate
/// symmetric and is reported as [`EstimatorError::NumericalInconsistency`].
pub fn fejer_spot_reconstruct(alpha: &AlphaTable, n_freq: usize, grid: &[f64]) -> Result<SpotCurve> {
    if n_freq == 0 {
        return Err(EstimatorError::InvalidCutoff(
            "Fejér reconstruction needs N >= 1".into(),
        ));
    }
    if alpha.max_k() < n_freq {
        return Err(EstimatorError::CoeffRange {
            required: n_freq,
            available: alpha.max_k(),
        });
    }
    check_grid(grid)?;

    let top = n_freq as i64 - 1;
    let mut values = Vec::with_capacity(grid.len());
    for &t in grid {
        let mut z = Complex64::new(0.0, 0.0);
        for k in -top..=top {
            z += alpha.get(k) * Complex64::from_polar(fejer_weight(k, n_freq), k as f64 * t);
        }
        if z.im.abs() > IMAG_TOLERANCE * (1.0 + z.re.abs()) {
            return Err(EstimatorError::NumericalInconsistency(format!(
                "Fejér sum at t = {t} has imaginary part {} (real part {})",
                z.im, z.re
            )));
        }
        values.push(z.re);
    }
    Ok(SpotCurve {
        grid: grid.to_vec(),
        values,
        n_freq,
        variant: SpotVariant::FejerCanonical,
    })
}

/// Normalization of the doubly truncated convolution `Ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PositiveNormalization {
    /// `2π/(4N+1)`: one over the number of products at `k = 0`, times 2π, so
    /// that the curve estimates the variance itself.
    #[default]
    Consistent,
    /// `1/(2N+1)`, which estimates `(4N+1)/(2π(2N+1))` times the variance.
    AsPrinted,
}

impl PositiveNormalization {
    pub fn factor(self, n_freq: usize) -> f64 {
        match self {
            PositiveNormalization::Consistent => TAU / (4 * n_freq + 1) as f64,
            PositiveNormalization::AsPrinted => 1.0 / (2 * n_freq + 1) as f64,
        }
    }
}

/// Convolution of the return coefficients truncated at `|s| <= 2N`, summed
/// over every `s` for which both factors are nonzero:
/// `Ψ(k) = λ Σ_s Φ(s) Φ(k-s)` for `|k| < N`, with `λ` set by `normalization`.
pub fn positive_convolution(
    c: &CoeffTable,
    n_freq: usize,
    normalization: PositiveNormalization,
) -> Result<Vec<Complex64>> {
    let cut = 2 * n_freq;
    c.require(cut)?;
    let cut = cut as i64;
    let norm = normalization.factor(n_freq);
    let top = n_freq as i64 - 1;
    Ok((-top..=top)
        .map(|k| {
            let lo = (-cut).max(k - cut);
            let hi = cut.min(k + cut);
            let mut acc = Complex64::new(0.0, 0.0);
            for s in lo..=hi {
                acc += c.get(s) * c.get(k - s);
            }
            acc * norm
        })
        .collect())
}

/// Positive spot reconstruction for a single asset.
///
/// Evaluates `Σ_{|k|<N} (1 - |k|/N) Ψ(k) e^{ikt}` with [`positive_convolution`].
/// This is the Fejér mean of `λ |Σ_{|s|≤2N} c_s e^{ist}|²`, hence
/// nonnegative up to rounding.
pub fn positive_spot_reconstruct(
    c: &CoeffTable,
    n_freq: usize,
    grid: &[f64],
    normalization: PositiveNormalization,
) -> Result<SpotCurve> {
    if n_freq == 0 {
        return Err(EstimatorError::InvalidCutoff(
            "Fejér reconstruction needs N >= 1".into(),
        ));
    }
    check_grid(grid)?;
    let psi = positive_convolution(c, n_freq, normalization)?;

    // Upper bound of the nonnegative kernel, used to scale the tolerance.
    let cut = 2 * n_freq as i64;
    let l1: f64 = (-cut..=cut).map(|s| c.get(s).norm()).sum();
    let scale = normalization.factor(n_freq) * l1 * l1;

    let top = n_freq as i64 - 1;
    let mut values = Vec::with_capacity(grid.len());
    for &t in grid {
        let mut z = Complex64::new(0.0, 0.0);
        for (i, k) in (-top..=top).enumerate() {
            z += psi[i] * Complex64::from_polar(fejer_weight(k, n_freq), k as f64 * t);
        }
        if z.re < -POSITIVITY_TOLERANCE * (1.0 + scale) {
            return Err(EstimatorError::NumericalInconsistency(format!(
                "positive Fejér sum is {} at t = {t}",
                z.re
            )));
        }
        values.push(z.re);
    }
    Ok(SpotCurve {
        grid: grid.to_vec(),
        values,
        n_freq,
        variant: SpotVariant::FejerPositive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convolution::convolution_coeffs;
    use crate::fourier::return_fourier_coeffs;
    use crate::series::{rescale_time, TickSeries};
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_alpha0_gives_flat_curve() {
        let mut nonneg = vec![c(0.0, 0.0); 9];
        nonneg[0] = c(0.37, 0.0);
        let alpha = AlphaTable::from_nonnegative(8, &nonneg);
        let curve = fejer_spot_reconstruct(&alpha, 8, &default_grid(32)).unwrap();
        assert!(curve.values.iter().all(|v| (v - 0.37).abs() < 1e-15));
        assert_eq!(curve.variant, SpotVariant::FejerCanonical);
    }

    #[test]
    fn fejer_error_within_modulus_of_continuity() {
        // φ(t) = a + b cos t has c_0 = a, c_{±1} = b/2; ω_φ(λ) <= |b| λ.
        let (a, b) = (0.1, 0.05);
        for n in [2_usize, 5, 17, 64] {
            let mut nonneg = vec![c(0.0, 0.0); n + 1];
            nonneg[0] = c(a, 0.0);
            nonneg[1] = c(b / 2.0, 0.0);
            let alpha = AlphaTable::from_nonnegative(n, &nonneg);
            let grid = default_grid(512);
            let curve = fejer_spot_reconstruct(&alpha, n, &grid).unwrap();
            let sup = grid
                .iter()
                .zip(&curve.values)
                .map(|(t, v)| (v - (a + b * t.cos())).abs())
                .fold(0.0, f64::max);
            assert!(sup <= b * 4.0 / n as f64, "N = {n}: {sup}");
        }
    }

    #[test]
    fn pointwise_map_ignores_grid_order() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let mut nonneg: Vec<Complex64> = (0..=6).map(|_| c(rng.gen(), rng.gen())).collect();
        nonneg[0].im = 0.0;
        let alpha = AlphaTable::from_nonnegative(6, &nonneg);
        let grid = default_grid(50);
        let mut reversed = grid.clone();
        reversed.reverse();
        let fwd = fejer_spot_reconstruct(&alpha, 6, &grid).unwrap();
        let bwd = fejer_spot_reconstruct(&alpha, 6, &reversed).unwrap();
        let mut back = bwd.values.clone();
        back.reverse();
        assert_eq!(fwd.values, back);
    }

    #[test]
    fn asymmetric_table_is_flagged() {
        let alpha = AlphaTable::from_raw(1, vec![c(0.0, 0.0), c(1.0, 0.5), c(0.0, 0.0)]);
        assert!(matches!(
            fejer_spot_reconstruct(&alpha, 1, &[0.0]),
            Err(EstimatorError::NumericalInconsistency(_))
        ));
    }

    #[test]
    fn rejects_bad_cutoff_and_grid() {
        let alpha = AlphaTable::from_nonnegative(2, &[c(1.0, 0.0); 3]);
        assert!(matches!(
            fejer_spot_reconstruct(&alpha, 0, &[0.0]),
            Err(EstimatorError::InvalidCutoff(_))
        ));
        assert!(matches!(
            fejer_spot_reconstruct(&alpha, 3, &[0.0]),
            Err(EstimatorError::CoeffRange { .. })
        ));
        assert_eq!(
            fejer_spot_reconstruct(&alpha, 2, &[7.0]),
            Err(EstimatorError::InvalidGrid(7.0))
        );
    }

    #[test]
    fn positive_variant_zero_returns() {
        let s = rescale_time(
            &TickSeries::new("x", vec![0.0, 1.0, 2.0], vec![0.3; 3]).unwrap(),
            (0.0, 2.0),
        )
        .unwrap();
        let table = return_fourier_coeffs(&s, 8);
        let curve =
            positive_spot_reconstruct(&table, 4, &default_grid(16), PositiveNormalization::Consistent)
                .unwrap();
        assert!(curve.values.iter().all(|&v| v == 0.0));
        assert_eq!(curve.variant, SpotVariant::FejerPositive);
    }

    #[test]
    fn positive_variant_single_return() {
        // Φ(s) = δ/2π for |s| <= 2N; Q(t) = (δ/2π)² |Σ e^{ist}|² / (2N+1) >= 0.
        let delta = 0.3;
        let s = rescale_time(
            &TickSeries::new("x", vec![0.0, 1e-9, 1.0], vec![0.0, delta, delta]).unwrap(),
            (0.0, 1.0),
        )
        .unwrap();
        let n = 5;
        let table = return_fourier_coeffs(&s, 2 * n);
        let grid = default_grid(40);
        let curve = positive_spot_reconstruct(&table, n, &grid, PositiveNormalization::AsPrinted).unwrap();
        assert!(curve.values.iter().all(|&v| v >= -1e-14));

        // The Fejér mean of a constant-in-s kernel: brute-force the double sum.
        let phi = delta / TAU;
        let cut = 2 * n as i64;
        for (t, v) in grid.iter().zip(&curve.values) {
            let mut total = 0.0;
            for k in -(n as i64 - 1)..=(n as i64 - 1) {
                let overlap = (2 * cut + 1 - k.abs()) as f64;
                let w = 1.0 - k.abs() as f64 / n as f64;
                total += w * overlap * phi * phi * (k as f64 * t).cos();
            }
            total /= (2 * n + 1) as f64;
            assert!((total - v).abs() < 1e-12, "{total} vs {v}");
        }
    }

    #[test]
    fn diagonal_variants_share_alpha0_scale() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        let n_obs = 400;
        let times: Vec<f64> = (0..=n_obs).map(|j| j as f64).collect();
        let mut p = 0.0;
        let prices: Vec<f64> = (0..=n_obs)
            .map(|_| {
                p += 0.02 * (rng.gen::<f64>() - 0.5);
                p
            })
            .collect();
        let s = rescale_time(&TickSeries::new("x", times, prices).unwrap(), (0.0, n_obs as f64))
            .unwrap();
        let n = 10;
        let table = return_fourier_coeffs(&s, 2 * n);
        let alpha = convolution_coeffs(&table, &table, n, n).unwrap();
        let grid = default_grid(64);
        let canon = fejer_spot_reconstruct(&alpha, n, &grid).unwrap();
        let pos = positive_spot_reconstruct(&table, n, &grid, PositiveNormalization::Consistent).unwrap();
        let printed = positive_spot_reconstruct(&table, n, &grid, PositiveNormalization::AsPrinted).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        // Grid means pick out the k = 0 terms: energy averages over |s| <= N
        // and |s| <= 2N respectively.
        let (m1, m2) = (mean(&canon.values), mean(&pos.values));
        assert!((m1 - m2).abs() < 0.5 * m1, "{m1} vs {m2}");
        let ratio = TAU * (2 * n + 1) as f64 / (4 * n + 1) as f64;
        for (a, b) in pos.values.iter().zip(&printed.values) {
            assert!((a - ratio * b).abs() <= 1e-12 * a.abs());
        }
    }
}
