//! Distribution of the normalized weighted-integral error
//! `ρ^{-1/2} ∫ h (Σ̂ - Σ) dt` against its Gaussian limit.

use std::f64::consts::TAU;

use fouriervol_core::{convolution_coeffs, return_fourier_coeffs, AlphaTable};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::report::{mean, sample_variance, ExperimentReport, Record, StudyKind};
use super::test_function::TestFunction;
use super::{derive_seed, fine_step, rescale_all, run_indexed, shape_moments, CutoffRule};
use crate::error::{Result, SimError};
use crate::simulate::{
    draw_times, h_n_statistic, sample_path, simulate_path, FinePath, ModelKind, ModelSpec, SamplingKind,
    SamplingScheme, JITTER,
};

const TAG: u64 = 2;
const CELL: &str = "clt";

/// Cells of the finite-difference `H′` quadrature and nodes per cell.
const H_CELLS: usize = 256;
const H_SUBNODES: usize = 16;

/// Highest `h` coefficient ever considered.
const H_COEFF_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltConfig {
    pub model: ModelSpec,
    pub scheme: SamplingKind,
    pub cutoff: CutoffRule,
    pub test_function: TestFunction,
    pub pair: (usize, usize),
    pub replications: usize,
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

impl CltConfig {
    pub fn new(model: ModelSpec, scheme: SamplingKind, replications: usize, seed: u64) -> Self {
        Self {
            model,
            scheme,
            cutoff: CutoffRule::Nyquist,
            test_function: TestFunction::Bump,
            pair: (0, 0),
            replications,
            seed,
            threads: None,
        }
    }

    fn bivariate(&self) -> bool {
        self.pair.0 != self.pair.1
    }

    fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.scheme.validate()?;
        match self.model.kind() {
            ModelKind::ConstantVol | ModelKind::DeterministicVol => {}
            ModelKind::StochasticVol => {
                return Err(SimError::Config(
                    "the CLT study needs a deterministic volatility so the limit variance is a constant".into(),
                ))
            }
        }
        if matches!(self.scheme, SamplingKind::Poisson { .. }) {
            return Err(SimError::Config("the CLT study needs even or jittered sampling".into()));
        }
        let (i, j) = self.pair;
        if i.max(j) >= self.model.n_assets() {
            return Err(SimError::Config(format!("pair ({i}, {j}) exceeds the asset count")));
        }
        if self.replications < 2 {
            return Err(SimError::Config("the CLT study needs at least 2 replications".into()));
        }
        Ok(())
    }
}

/// Errors unless `(ρ, N)` sits in the cutoff regime of the limit theorem.
fn check_regime(rho: f64, n_freq: usize, alpha: f64, bivariate: bool) -> Result<()> {
    let n = n_freq as f64;
    let min_alpha = if bivariate { 2.0 / 3.0 } else { 0.5 };
    if alpha <= min_alpha {
        return Err(SimError::Config(format!(
            "Hoelder exponent alpha = {alpha} violates alpha > {min_alpha:.4}"
        )));
    }
    let lower = rho * n.powf(2.0 * alpha);
    if lower < 1.0 {
        return Err(SimError::Config(format!(
            "cutoff N = {n_freq} violates rho * N^(2 alpha) >= 1 (value {lower:.4e})"
        )));
    }
    if bivariate {
        let upper = rho * n.powf(4.0 / 3.0);
        if upper > 1.0 {
            return Err(SimError::Config(format!(
                "cutoff N = {n_freq} violates rho * N^(4/3) <= 1 (value {upper:.4e})"
            )));
        }
    }
    Ok(())
}

/// `∫ h Σ̂ dt = 2π Σ_{|k|<N} (1 - |k|/N) α_k c_{-k}(h)`, exact for the
/// Fejér reconstruction.
fn weighted_integral(alpha: &AlphaTable, h_coeffs: &[Complex64], n_freq: usize) -> f64 {
    let mut acc = 0.0;
    for (k, ch) in h_coeffs.iter().enumerate().take(n_freq) {
        let w = 1.0 - k as f64 / n_freq as f64;
        // α_{-k} c_k(h) + α_k c_{-k}(h) = 2 Re(α_k conj(c_k(h))).
        let term = (alpha.get(k as i64) * ch.conj()).re;
        acc += if k == 0 { w * term } else { 2.0 * w * term };
    }
    TAU * acc
}

/// `∫ h Σ^{ij} dt` by the trapezoid rule on the fine grid.
fn true_weighted_integral(path: &FinePath, h: TestFunction, i: usize, j: usize) -> f64 {
    let s = path.spot(i, j);
    let n = path.n_steps;
    let inner: f64 = (1..n).map(|m| h.eval(path.time(m)) * s[m]).sum();
    path.step * (inner + 0.5 * (h.eval(0.0) * s[0] + h.eval(TAU) * s[n]))
}

/// Integrand of the limit variance without `H′`: `2 h² σ⁴` or
/// `h² (Σ¹¹Σ²² + (Σ¹²)²)`.
fn limit_integrand(path: &FinePath, h: TestFunction, pair: (usize, usize), t: f64) -> f64 {
    let (i, j) = pair;
    let hv = h.eval(t);
    let core = if i == j {
        2.0 * path.spot_at(i, i, t).powi(2)
    } else {
        path.spot_at(i, i, t) * path.spot_at(j, j, t) + path.spot_at(i, j, t).powi(2)
    };
    hv * hv * core
}

/// Analytic `H′` where it is a known constant.
fn analytic_h_prime(scheme: SamplingKind, bivariate: bool) -> Option<f64> {
    match scheme {
        SamplingKind::Even { .. } => Some(1.0),
        // Gaps h(1 + u_{j+1} - u_j) with u uniform on ±JITTER.
        SamplingKind::Jittered { .. } if !bivariate => Some(1.0 + 2.0 * JITTER * JITTER / 3.0),
        _ => None,
    }
}

/// Limit variance with `H′` from differences of `H_n` over [`H_CELLS`] cells.
fn h_n_variance(path: &FinePath, config: &CltConfig, t1: &[f64], t2: Option<&[f64]>) -> f64 {
    let width = TAU / H_CELLS as f64;
    let boundaries: Vec<f64> = (0..=H_CELLS)
        .map(|c| {
            let t = c as f64 * width;
            h_n_statistic(t1, t2, if c == H_CELLS { TAU } else { t })
        })
        .collect();
    let mut total = 0.0;
    for c in 0..H_CELLS {
        let d_h = boundaries[c + 1] - boundaries[c];
        let avg: f64 = (0..H_SUBNODES)
            .map(|q| {
                let t = (c as f64 + (q as f64 + 0.5) / H_SUBNODES as f64) * width;
                limit_integrand(path, config.test_function, config.pair, t)
            })
            .sum::<f64>()
            / H_SUBNODES as f64;
        total += d_h * avg;
    }
    total
}

/// Limit variance with a constant `H′`, trapezoid on the fine grid.
fn constant_h_variance(path: &FinePath, config: &CltConfig, h_prime: f64) -> f64 {
    let n = path.n_steps;
    let f = |m: usize| limit_integrand(path, config.test_function, config.pair, path.time(m));
    let inner: f64 = (1..n).map(f).sum();
    h_prime * path.step * (inner + 0.5 * (f(0) + f(n)))
}

pub fn clt_study(config: &CltConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let (pi, pj) = config.pair;
    let bivariate = config.bivariate();
    let scheme = SamplingScheme::uniform(config.scheme);
    let step = fine_step(config.scheme);

    // Replication 0 fixes the sampling geometry used for ρ, N and H_n.
    let seed0 = derive_seed(config.seed, &[TAG, 0]);
    let t1 = draw_times(config.scheme, seed0, pi)?;
    let t2 = if bivariate { Some(draw_times(config.scheme, seed0, pj)?) } else { None };
    let k_n = match &t2 {
        Some(t2) => t1.len().min(t2.len()) - 1,
        None => t1.len() - 1,
    };
    let rho = TAU / k_n as f64;
    let mut flags = Vec::new();
    if let Some(t2) = &t2 {
        if t2.len() != t1.len() {
            flags.push(format!(
                "unequal interval counts ({} and {}); H_n uses n = {k_n}",
                t1.len() - 1,
                t2.len() - 1
            ));
        }
    }
    let n_freq = config.cutoff.resolve(rho, k_n)?;
    if n_freq == 0 {
        return Err(SimError::Config("the CLT study needs N >= 1".into()));
    }
    let alpha_h = config.test_function.holder_alpha();
    check_regime(rho, n_freq, alpha_h, bivariate)?;
    if rho * n_freq as f64 >= 1.0 {
        flags.push(format!(
            "rho * N = {:.3} >= 1: the cutoff is outside the consistency regime rho * N -> 0",
            rho * n_freq as f64
        ));
    }

    let h_coeffs = config
        .test_function
        .significant_coeffs(H_COEFF_LIMIT.min(n_freq.saturating_sub(1)));
    let k_h = h_coeffs.len().min(n_freq);
    let max_k = k_h.saturating_sub(1);

    let reps = config.replications;
    let records = run_indexed(reps, config.threads, |rep| {
        let seed = derive_seed(config.seed, &[TAG, rep as u64]);
        let path = simulate_path(&config.model, step, seed)?;
        let series = rescale_all(&sample_path(&path, &scheme, seed)?)?;
        let (s1, s2) = (&series[pi], &series[pj]);
        let c1 = return_fourier_coeffs(s1, n_freq + max_k);
        let c2 = if bivariate { return_fourier_coeffs(s2, n_freq + max_k) } else { c1.clone() };
        let alpha = convolution_coeffs(&c1, &c2, n_freq, max_k)?;
        let estimate = weighted_integral(&alpha, &h_coeffs, n_freq);
        let truth = true_weighted_integral(&path, config.test_function, pi, pj);
        let stat = (estimate - truth) / rho.sqrt();
        Ok(Record::new(rep, seed, CELL, stat, 0.0)
            .with("integral_estimate", estimate)
            .with("integral_truth", truth))
    })?;

    // The model is deterministic, so any replication's path gives the limit
    // integrand.
    let path0 = simulate_path(&config.model, step, seed0)?;
    let var_h_n = h_n_variance(&path0, config, &t1, t2.as_deref());
    let var_analytic = analytic_h_prime(config.scheme, bivariate).map(|hp| constant_h_variance(&path0, config, hp));
    let var_theory = var_analytic.unwrap_or(var_h_n);

    let stats: Vec<f64> = records.iter().map(|r| r.estimate).collect();
    let sample_var = sample_variance(&stats);
    let (skew, exkurt) = if sample_var > 0.0 { shape_moments(&stats) } else { (0.0, 0.0) };

    let config_echo = serde_json::to_value(config).expect("serializable config");
    let mut report = ExperimentReport::new(StudyKind::Clt, config_echo, reps, records);
    report.flags = flags;
    let d = &mut report.diagnostics;
    d.insert("rho".into(), rho);
    d.insert("n_freq".into(), n_freq as f64);
    d.insert("k_h".into(), k_h as f64);
    d.insert("sample_mean".into(), mean(&stats));
    d.insert("sample_variance".into(), sample_var);
    d.insert("theory_variance".into(), var_theory);
    d.insert("theory_variance_h_n".into(), var_h_n);
    if let Some(v) = var_analytic {
        d.insert("theory_variance_analytic".into(), v);
    }
    d.insert("skewness".into(), skew);
    d.insert("excess_kurtosis".into(), exkurt);

    if var_theory > 0.0 {
        let ratio = sample_var / var_theory;
        report.diagnostics.insert("variance_ratio".into(), ratio);
        report.push_check(
            "variance_within_15pct",
            (ratio - 1.0).abs() <= 0.15,
            format!("sample variance {sample_var:.5e}, limit variance {var_theory:.5e}, ratio {ratio:.4}"),
        );
        report.push_check("abs_skewness_below_0.15", skew.abs() < 0.15, format!("skewness {skew:.4}"));
        report.push_check(
            "abs_excess_kurtosis_below_0.3",
            exkurt.abs() < 0.3,
            format!("excess kurtosis {exkurt:.4}"),
        );
        if let Some(va) = var_analytic {
            let rel = (va - var_h_n).abs() / va;
            report.push_check(
                "limit_variance_routes_agree_2pct",
                rel <= 0.02,
                format!("analytic H' {va:.6e}, differenced H_n {var_h_n:.6e}, relative gap {rel:.3e}"),
            );
        }
    }
    Ok(report)
}
