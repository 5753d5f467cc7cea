//! Finite Bohr convolution of two return-coefficient tables.
//!
//! For a cutoff `N` the ordered convolution is
//!
//! ```text
//! α_k(c¹, c²) = 2π/(2N+1) · Σ_{|s|≤N} c¹_s c²_{k-s}
//! ```
//!
//! which converges to the `k`-th Fourier coefficient of the co-volatility.
//! At finite `N` the ordered sum is not symmetric in the two assets when
//! `k ≠ 0` (swapping them shifts the summation window to `|k-s| ≤ N`), so
//! [`convolution_coeffs`] averages both orderings. For a single asset the
//! two orderings coincide and the result is the ordered sum exactly.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::Result;
use crate::fourier::CoeffTable;

/// Convolution coefficients `α_k` for `|k| <= max_k` at cutoff `n_freq`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    max_k: usize,
    n_freq: usize,
    alphas: Vec<Complex64>,
}

impl AlphaTable {
    /// Wraps precomputed `α_0..=α_K`, filling negative indices by conjugation.
    pub fn from_nonnegative(n_freq: usize, nonneg: &[Complex64]) -> Self {
        let table = CoeffTable::from_nonnegative(nonneg);
        Self {
            max_k: table.max_k(),
            n_freq,
            alphas: table.as_slice().to_vec(),
        }
    }

    /// Wraps a full `-max_k..=max_k` table without checking symmetry.
    #[cfg(test)]
    pub(crate) fn from_raw(n_freq: usize, alphas: Vec<Complex64>) -> Self {
        assert!(alphas.len() % 2 == 1);
        Self {
            max_k: alphas.len() / 2,
            n_freq,
            alphas,
        }
    }

    pub fn max_k(&self) -> usize {
        self.max_k
    }

    /// Cutoff `N` used in the convolution average.
    pub fn n_freq(&self) -> usize {
        self.n_freq
    }

    #[inline]
    pub fn get(&self, k: i64) -> Complex64 {
        self.alphas[(k + self.max_k as i64) as usize]
    }

    /// Values ordered from `-max_k` to `max_k`.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.alphas
    }
}

/// Ordered sum `Σ_{|s|≤N} a_s b_{k-s}` without the normalizing factor.
fn ordered_sum(a: &CoeffTable, b: &CoeffTable, n_freq: usize, k: i64) -> Complex64 {
    let n = n_freq as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for s in -n..=n {
        acc += a.get(s) * b.get(k - s);
    }
    acc
}

fn check_ranges(c1: &CoeffTable, c2: &CoeffTable, n_freq: usize, max_k: usize) -> Result<()> {
    if max_k > n_freq {
        return Err(crate::error::EstimatorError::InvalidCutoff(format!(
            "max_k = {max_k} exceeds the convolution cutoff N = {n_freq}"
        )));
    }
    c1.require(n_freq + max_k)?;
    c2.require(n_freq + max_k)
}

/// `α_k` exactly as the ordered convolution of `c1` with `c2`.
pub fn convolution_coeffs_ordered(
    c1: &CoeffTable,
    c2: &CoeffTable,
    n_freq: usize,
    max_k: usize,
) -> Result<AlphaTable> {
    check_ranges(c1, c2, n_freq, max_k)?;
    let norm = TAU / (2 * n_freq + 1) as f64;
    let k_max = max_k as i64;
    let alphas = (-k_max..=k_max)
        .map(|k| ordered_sum(c1, c2, n_freq, k) * norm)
        .collect();
    Ok(AlphaTable {
        max_k,
        n_freq,
        alphas,
    })
}

/// Asset-symmetric `α_k`: the mean of both ordered convolutions.
///
/// Requires both tables to reach `n_freq + max_k` and `max_k <= n_freq`.
pub fn convolution_coeffs(
    c1: &CoeffTable,
    c2: &CoeffTable,
    n_freq: usize,
    max_k: usize,
) -> Result<AlphaTable> {
    check_ranges(c1, c2, n_freq, max_k)?;
    let norm = TAU / (2 * n_freq + 1) as f64;
    let k_max = max_k as i64;
    let same = c1 == c2;
    let alphas = (-k_max..=k_max)
        .map(|k| {
            let forward = ordered_sum(c1, c2, n_freq, k);
            if same {
                forward * norm
            } else {
                let backward = ordered_sum(c2, c1, n_freq, k);
                (forward + backward) * (0.5 * norm)
            }
        })
        .collect();
    Ok(AlphaTable {
        max_k,
        n_freq,
        alphas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::EstimatorError;
    use rand::{Rng, SeedableRng};

    fn random_table(seed: u64, max_k: usize) -> CoeffTable {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<Complex64> = (0..=max_k)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        v[0].im = 0.0;
        CoeffTable::from_nonnegative(&v)
    }

    #[test]
    fn diagonal_alpha0_is_weighted_energy() {
        let c = random_table(1, 12);
        let a = convolution_coeffs(&c, &c, 6, 6).unwrap();
        let energy: f64 = (-6..=6).map(|s| c.get(s).norm_sqr()).sum();
        let expected = TAU / 13.0 * energy;
        assert!((a.get(0).re - expected).abs() < 1e-12 * expected);
        assert!(a.get(0).im.abs() < 1e-14);
    }

    #[test]
    fn symmetric_version_is_swap_invariant() {
        let c1 = random_table(2, 20);
        let c2 = random_table(3, 20);
        let a = convolution_coeffs(&c1, &c2, 10, 10).unwrap();
        let b = convolution_coeffs(&c2, &c1, 10, 10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ordered_version_differs_off_zero() {
        // The ordered sum only commutes with the asset swap at k = 0.
        let c1 = random_table(4, 20);
        let c2 = random_table(5, 20);
        let a = convolution_coeffs_ordered(&c1, &c2, 10, 10).unwrap();
        let b = convolution_coeffs_ordered(&c2, &c1, 10, 10).unwrap();
        assert!((a.get(0) - b.get(0)).norm() < 1e-13);
        assert!((a.get(3) - b.get(3)).norm() > 1e-6);

        // The swapped ordered sum equals the substituted window u = k - s.
        let k = 3_i64;
        let substituted: Complex64 = (k - 10..=k + 10)
            .map(|u| c1.get(u) * c2.get(k - u))
            .sum::<Complex64>()
            * (TAU / 21.0);
        assert!((b.get(k) - substituted).norm() < 1e-12);
    }

    #[test]
    fn conjugate_symmetry() {
        let c1 = random_table(6, 30);
        let c2 = random_table(7, 30);
        let a = convolution_coeffs(&c1, &c2, 15, 15).unwrap();
        for k in 1..=15 {
            assert!((a.get(-k) - a.get(k).conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_input_gives_zero() {
        let z = CoeffTable::from_nonnegative(&vec![Complex64::new(0.0, 0.0); 9]);
        let a = convolution_coeffs(&z, &z, 4, 4).unwrap();
        assert!(a.as_slice().iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn insufficient_range_names_requirement() {
        let c = random_table(8, 10);
        assert_eq!(
            convolution_coeffs(&c, &c, 6, 6),
            Err(EstimatorError::CoeffRange { required: 12, available: 10 })
        );
        assert!(matches!(
            convolution_coeffs(&c, &c, 3, 4),
            Err(EstimatorError::InvalidCutoff(_))
        ));
    }
}
