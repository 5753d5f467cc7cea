use std::f64::consts::{PI, TAU};

use fouriervol_core::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn even_walk(rng: &mut ChaCha8Rng, n: usize, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let times: Vec<f64> = (0..=n).map(|j| TAU * j as f64 / n as f64).collect();
    let sd = sigma * (TAU / n as f64).sqrt();
    let mut p = 0.0;
    let mut prices = vec![0.0];
    for _ in 0..n {
        p += sd * rng.sample::<f64, _>(StandardNormal);
        prices.push(p);
    }
    (times, prices)
}

fn rescaled(times: Vec<f64>, prices: Vec<f64>) -> RescaledSeries {
    rescale_time(&TickSeries::new("x", times, prices).unwrap(), (0.0, TAU)).unwrap()
}

#[test]
fn dirichlet_plancherel_by_trapezoid() {
    let m = 100_000;
    let h = TAU / m as f64;
    for n in [1, 4, 16, 64] {
        let mut sum = 0.5 * (dirichlet_kernel(n, 0.0).powi(2) + dirichlet_kernel(n, TAU).powi(2));
        for j in 1..m {
            sum += dirichlet_kernel(n, j as f64 * h).powi(2);
        }
        let integral = sum * h;
        let expected = TAU / (2 * n + 1) as f64;
        assert!((integral / expected - 1.0).abs() < 1e-6, "N = {n}: {integral} vs {expected}");
    }
}

#[test]
fn nyquist_cutoff_equals_realized_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [3, 51, 999, 4001] {
        let (t, p) = even_walk(&mut rng, n, 0.3);
        let s = rescaled(t, p);
        let nf = (n - 1) / 2;
        let c = return_fourier_coeffs(&s, nf);
        let iv = integrated_volatility(&c, nf).unwrap();
        let rv = realized_variance(&s);
        assert!((iv - rv).abs() <= 1e-10 * rv, "n = {n}: {iv} vs {rv}");
    }
}

#[test]
fn polarization_on_synchronous_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (t, p1) = even_walk(&mut rng, 300, 0.2);
    let (_, p2) = even_walk(&mut rng, 300, 0.4);
    let plus: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| a + b).collect();
    let minus: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| a - b).collect();
    let s1 = rescaled(t.clone(), p1);
    let s2 = rescaled(t.clone(), p2);
    for n in [1, 7, 40, 149] {
        let vp = integrated_volatility(&return_fourier_coeffs(&rescaled(t.clone(), plus.clone()), n), n).unwrap();
        let vm = integrated_volatility(&return_fourier_coeffs(&rescaled(t.clone(), minus.clone()), n), n).unwrap();
        let cov = integrated_covolatility(&s1, &s2, n).unwrap();
        assert!((0.25 * (vp - vm) - cov).abs() <= 1e-10 * (vp + vm), "N = {n}");
    }
}

#[test]
fn covolatility_two_routes_agree_on_asynchronous_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let mut t1: Vec<f64> = (0..200).map(|_| rng.gen_range(0.0..TAU)).collect();
        let mut t2: Vec<f64> = (0..150).map(|_| rng.gen_range(0.0..TAU)).collect();
        t1.sort_by(f64::total_cmp);
        t2.sort_by(f64::total_cmp);
        let p1: Vec<f64> = (0..200).map(|_| rng.gen_range(-0.1..0.1)).collect();
        let p2: Vec<f64> = (0..150).map(|_| rng.gen_range(-0.1..0.1)).collect();
        let s1 = rescaled(t1, p1);
        let s2 = rescaled(t2, p2);
        for n in [0, 3, 25, 80] {
            let a = integrated_covolatility(&s1, &s2, n).unwrap();
            let b = integrated_covolatility_dirichlet(&s1, &s2, n).unwrap();
            let scale = realized_variance(&s1).sqrt() * realized_variance(&s2).sqrt();
            assert!((a - b).abs() <= 1e-10 * scale.max(a.abs()), "N = {n}: {a} vs {b}");
        }
    }
}

#[test]
fn independent_paths_have_zero_mean_covolatility() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let reps = 1000;
    let values: Vec<f64> = (0..reps)
        .map(|_| {
            let (t, p1) = even_walk(&mut rng, 200, 0.3);
            let (_, p2) = even_walk(&mut rng, 200, 0.3);
            let n = select_cutoff(TAU / 200.0).unwrap();
            integrated_covolatility(&rescaled(t.clone(), p1), &rescaled(t, p2), n).unwrap()
        })
        .collect();
    let mean = values.iter().sum::<f64>() / reps as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let se = (var / reps as f64).sqrt();
    assert!(mean.abs() < 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn fejer_bound_for_cosine_profile() {
    // Exact coefficients of a + b cos t; ω(λ) = |b| λ.
    let (a, b) = (0.09, -0.04);
    for n in [1, 3, 10, 100] {
        let mut nonneg = vec![Complex64::new(0.0, 0.0); n + 1];
        nonneg[0].re = a;
        nonneg[1].re = b / 2.0;
        let alpha = AlphaTable::from_nonnegative(n, &nonneg);
        let grid = default_grid(1000);
        let curve = fejer_spot_reconstruct(&alpha, n, &grid).unwrap();
        let sup = grid
            .iter()
            .zip(&curve.values)
            .map(|(t, v)| (v - a - b * t.cos()).abs())
            .fold(0.0, f64::max);
        assert!(sup <= b.abs() * 4.0 / n as f64 + 1e-15, "N = {n}: {sup}");
    }
}

#[test]
fn positive_variant_matches_direct_double_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (t, p) = even_walk(&mut rng, 500, 0.3);
    let s = rescaled(t, p);
    let n = 16;
    let c = return_fourier_coeffs(&s, 2 * n);
    let grid = default_grid(64);
    let curve = positive_spot_reconstruct(&c, n, &grid, PositiveNormalization::Consistent).unwrap();
    assert!(curve.values.iter().all(|&v| v >= -1e-10));

    // Fejér mean of λ |Σ_{|s|≤2N} c_s e^{ist}|², by brute force over (k, s).
    let cut = 2 * n as i64;
    let lambda = TAU / (4 * n + 1) as f64;
    for (&u, &v) in grid.iter().zip(&curve.values) {
        let mut z = Complex64::new(0.0, 0.0);
        for k in -(n as i64 - 1)..=(n as i64 - 1) {
            let w = 1.0 - k.abs() as f64 / n as f64;
            for q in -cut..=cut {
                if (k - q).abs() <= cut {
                    z += w * c.get(q) * c.get(k - q) * Complex64::from_polar(1.0, k as f64 * u);
                }
            }
        }
        let direct = lambda * z.re;
        assert!((direct - v).abs() <= 1e-12 * direct.abs().max(1e-12), "{direct} vs {v}");
    }
}

#[test]
fn hayashi_yoshida_sweep_on_fifty_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let n1 = rng.gen_range(2..60);
        let n2 = rng.gen_range(2..60);
        let mut t1: Vec<f64> = (0..n1).map(|_| rng.gen_range(0.0..TAU)).collect();
        let mut t2: Vec<f64> = (0..n2).map(|_| rng.gen_range(0.0..TAU)).collect();
        t1.sort_by(f64::total_cmp);
        t2.sort_by(f64::total_cmp);
        // Shared knots exercise the touching-endpoint rule.
        if t1[0] <= t2[1] {
            t2[0] = t1[0];
        }
        let p1: Vec<f64> = (0..n1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p2: Vec<f64> = (0..n2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s1 = rescaled(t1, p1);
        let s2 = rescaled(t2, p2);
        let fast = hayashi_yoshida(&s1, &s2).unwrap();
        let slow = hayashi_yoshida_brute_force(&s1, &s2).unwrap();
        assert!((fast - slow).abs() < 1e-12 * (1.0 + slow.abs()));
    }
}

#[test]
fn synchronous_hayashi_yoshida_is_realized_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (t, p1) = even_walk(&mut rng, 100, 0.2);
    let (_, p2) = even_walk(&mut rng, 100, 0.2);
    let s1 = rescaled(t.clone(), p1);
    let s2 = rescaled(t, p2);
    let rc: f64 = s1.returns().iter().zip(s2.returns()).map(|(a, b)| a * b).sum();
    assert_eq!(hayashi_yoshida(&s1, &s2).unwrap(), rc);
}

#[test]
fn previous_tick_and_realized_variance_on_native_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (t, p) = even_walk(&mut rng, 64, 0.5);
    let ticks = TickSeries::new("x", t.clone(), p.clone()).unwrap();
    let rc = realized_covariance_previous_tick(&ticks, &ticks, SyncSpec::new(TAU / 64.0)).unwrap();
    let rv = realized_variance(&rescaled(t, p));
    assert!((rc - rv).abs() <= 1e-14 * rv);
}

#[test]
fn cutoff_examples() {
    assert_eq!(select_cutoff(1.0).unwrap(), 1);
    assert_eq!(select_cutoff(1e-3).unwrap(), 100);
    let direct = ((TAU / 1000.0_f64).powf(-2.0 / 3.0) + 0.5).floor() as usize;
    assert_eq!(direct, 29);
    assert_eq!(select_cutoff(TAU / 1000.0).unwrap(), 29);
    assert!((dirichlet_kernel(1, PI) + 1.0 / 3.0).abs() < 1e-15);
}
