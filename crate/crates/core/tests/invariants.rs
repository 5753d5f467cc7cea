use std::f64::consts::TAU;

use fouriervol_core::*;
use proptest::prelude::*;

/// Sorted times in (0, 1) plus log-prices, as a raw series on window (0, 1).
fn arb_series(max_len: usize) -> impl Strategy<Value = TickSeries> {
    (2..max_len).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0..1.0_f64, n),
            prop::collection::vec(-0.05..0.05_f64, n),
        )
            .prop_map(|(mut t, p)| {
                t.sort_by(f64::total_cmp);
                TickSeries::new("p", t, p).unwrap()
            })
    })
}

fn rescale(t: &TickSeries) -> Option<RescaledSeries> {
    rescale_time(t, (0.0, 1.0)).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rescaled_times_are_strict_and_anchored(t in arb_series(60)) {
        if let Some(s) = rescale(&t) {
            prop_assert_eq!(s.times()[0], 0.0);
            prop_assert_eq!(*s.times().last().unwrap(), TAU);
            prop_assert!(s.times().windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(s.returns().len() + 1, s.times().len());
            prop_assert!(s.mesh() > 0.0);
        }
    }

    #[test]
    fn coefficient_tables_are_conjugate_symmetric(t in arb_series(60), k in 0usize..80) {
        if let Some(s) = rescale(&t) {
            let c = return_fourier_coeffs(&s, k);
            for j in 0..=k as i64 {
                prop_assert_eq!(c.get(-j), c.get(j).conj());
            }
            let bound: f64 = s.returns().iter().map(|d| d.abs()).sum::<f64>() / TAU;
            prop_assert!(c.as_slice().iter().all(|z| z.norm() <= bound * (1.0 + 1e-12) + 1e-300));
        }
    }

    #[test]
    fn alpha_tables_are_swap_invariant_and_symmetric(
        a in arb_series(50), b in arb_series(50), n in 1usize..20,
    ) {
        if let (Some(s1), Some(s2)) = (rescale(&a), rescale(&b)) {
            let c1 = return_fourier_coeffs(&s1, 2 * n);
            let c2 = return_fourier_coeffs(&s2, 2 * n);
            let x = convolution_coeffs(&c1, &c2, n, n).unwrap();
            let y = convolution_coeffs(&c2, &c1, n, n).unwrap();
            prop_assert_eq!(&x, &y);
            let l2 = |c: &CoeffTable| c.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let scale = TAU / (2 * n + 1) as f64 * l2(&c1) * l2(&c2);
            for k in 0..=n as i64 {
                prop_assert!((x.get(-k) - x.get(k).conj()).norm() <= 1e-12 * scale + 1e-300);
            }
        }
    }

    #[test]
    fn integrated_estimators_are_nonnegative(t in arb_series(80), n in 0usize..40) {
        if let Some(s) = rescale(&t) {
            let c = return_fourier_coeffs(&s, n);
            prop_assert!(integrated_volatility(&c, n).unwrap() >= 0.0);
            if n >= 1 {
                for norm in [FejerNormalization::NPlusOne, FejerNormalization::TwoNPlusOne] {
                    prop_assert!(integrated_volatility_fejer(&c, n, norm).unwrap() >= 0.0);
                }
            }
        }
    }

    #[test]
    fn positive_variant_never_dips_below_tolerance(t in arb_series(80), n in 1usize..24) {
        if let Some(s) = rescale(&t) {
            let c = return_fourier_coeffs(&s, 2 * n);
            let curve = positive_spot_reconstruct(&c, n, &default_grid(64), PositiveNormalization::Consistent)
                .unwrap();
            prop_assert!(curve.values.iter().all(|&v| v >= -1e-10));
        }
    }

    #[test]
    fn canonical_spot_is_real(a in arb_series(50), b in arb_series(50), n in 1usize..20) {
        // Reconstruction errors out when the imaginary residue is too large.
        if let (Some(s1), Some(s2)) = (rescale(&a), rescale(&b)) {
            let c1 = return_fourier_coeffs(&s1, 2 * n);
            let c2 = return_fourier_coeffs(&s2, 2 * n);
            let alpha = convolution_coeffs(&c1, &c2, n, n).unwrap();
            prop_assert!(fejer_spot_reconstruct(&alpha, n, &default_grid(32)).is_ok());
        }
    }

    #[test]
    fn covolatility_routes_agree(a in arb_series(40), b in arb_series(40), n in 0usize..30) {
        if let (Some(s1), Some(s2)) = (rescale(&a), rescale(&b)) {
            let x = integrated_covolatility(&s1, &s2, n).unwrap();
            let y = integrated_covolatility_dirichlet(&s1, &s2, n).unwrap();
            let scale: f64 = s1.returns().iter().map(|d| d.abs()).sum::<f64>()
                * s2.returns().iter().map(|d| d.abs()).sum::<f64>();
            prop_assert!((x - y).abs() <= 1e-10 * scale.max(1e-300), "{} vs {}", x, y);
        }
    }

    #[test]
    fn hayashi_yoshida_sweep_matches_pair_scan(a in arb_series(40), b in arb_series(40)) {
        if let (Some(s1), Some(s2)) = (rescale(&a), rescale(&b)) {
            let fast = hayashi_yoshida(&s1, &s2).unwrap();
            let slow = hayashi_yoshida_brute_force(&s1, &s2).unwrap();
            let scale: f64 = s1.returns().iter().map(|d| d.abs()).sum::<f64>()
                * s2.returns().iter().map(|d| d.abs()).sum::<f64>();
            prop_assert!((fast - slow).abs() <= 1e-12 * scale.max(1e-300));
            prop_assert_eq!(fast, hayashi_yoshida(&s2, &s1).unwrap());
            prop_assert_eq!(hayashi_yoshida(&s1, &s1).unwrap(), realized_variance(&s1));
        }
    }
}
