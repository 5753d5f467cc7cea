//! Sup-norm error of the canonical spot estimate along a ladder of sample
//! sizes.

use std::f64::consts::TAU;

use fouriervol_core::{
    convolution_coeffs, default_grid, fejer_spot_reconstruct, return_fourier_coeffs, spot::DEFAULT_GRID_POINTS,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::report::{mean, median, sample_variance, ExperimentReport, Record, StudyKind};
use super::{derive_seed, fine_step, rescale_all, run_indexed, CutoffRule, SchemeFamily};
use crate::error::{Result, SimError};
use crate::simulate::{sample_path, simulate_path, FinePath, ModelSpec, SamplingScheme};

const TAG: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyConfig {
    pub model: ModelSpec,
    pub family: SchemeFamily,
    /// Increasing sample sizes.
    pub ladder: Vec<usize>,
    pub cutoff: CutoffRule,
    /// Entry `(i, j)` of the covariance path being estimated.
    pub pair: (usize, usize),
    pub grid_points: usize,
    pub replications: usize,
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

impl ConsistencyConfig {
    pub fn new(model: ModelSpec, ladder: Vec<usize>, replications: usize, seed: u64) -> Self {
        Self {
            model,
            family: SchemeFamily::Even,
            ladder,
            cutoff: CutoffRule::Auto,
            pair: (0, 0),
            grid_points: DEFAULT_GRID_POINTS,
            replications,
            seed,
            threads: None,
        }
    }

    fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.ladder.len() < 3 {
            return Err(SimError::Config(format!(
                "consistency ladder needs at least 3 sample sizes, got {}",
                self.ladder.len()
            )));
        }
        if self.ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SimError::Config("consistency ladder must be strictly increasing".into()));
        }
        let (i, j) = self.pair;
        if i.max(j) >= self.model.n_assets() {
            return Err(SimError::Config(format!("pair ({i}, {j}) exceeds the asset count")));
        }
        if self.replications == 0 || self.grid_points == 0 {
            return Err(SimError::Config("replications and grid_points must be positive".into()));
        }
        Ok(())
    }
}

/// `c_1(Σ^{ij})` of the true path, by the trapezoid rule on the fine grid.
fn true_first_coeff(path: &FinePath, i: usize, j: usize) -> Complex64 {
    let s = path.spot(i, j);
    let n = path.n_steps;
    let mut acc = Complex64::new(0.0, 0.0);
    // Periodic trapezoid: the endpoints share the weight of one node.
    for (m, &v) in s.iter().enumerate().take(n) {
        let w = if m == 0 { 0.5 * (s[0] + s[n]) } else { v };
        acc += Complex64::from_polar(w, -(m as f64) * path.step);
    }
    acc * (path.step / TAU)
}

pub fn consistency_study(config: &ConsistencyConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let (pi, pj) = config.pair;
    let grid = default_grid(config.grid_points);
    let reps = config.replications;
    let units = config.ladder.len() * reps;

    let records = run_indexed(units, config.threads, |unit| {
        let (li, rep) = (unit / reps, unit % reps);
        let n = config.ladder[li];
        let seed = derive_seed(config.seed, &[TAG, li as u64, rep as u64]);
        let kind = config.family.at(n);
        let path = simulate_path(&config.model, fine_step(kind), seed)?;
        let series = rescale_all(&sample_path(&path, &SamplingScheme::uniform(kind), seed)?)?;
        let (s1, s2) = (&series[pi], &series[pj]);
        let mesh = s1.mesh().max(s2.mesh());
        let n_returns = s1.n_returns().min(s2.n_returns());
        let n_freq = config.cutoff.resolve(mesh, n_returns)?;

        let c1 = return_fourier_coeffs(s1, 2 * n_freq);
        let c2 = if pi == pj { c1.clone() } else { return_fourier_coeffs(s2, 2 * n_freq) };
        let alpha = convolution_coeffs(&c1, &c2, n_freq, n_freq)?;
        let curve = fejer_spot_reconstruct(&alpha, n_freq, &grid)?;

        let mut sup_err = 0.0_f64;
        let mut sup_truth = 0.0_f64;
        for (&t, &v) in grid.iter().zip(&curve.values) {
            let truth = path.spot_at(pi, pj, t);
            sup_err = sup_err.max((v - truth).abs());
            sup_truth = sup_truth.max(truth.abs());
        }
        let a1 = alpha.get(1);
        let a1_true = true_first_coeff(&path, pi, pj);
        Ok(Record::new(rep, seed, format!("n={n}"), sup_err, 0.0)
            .with("n", n as f64)
            .with("N", n_freq as f64)
            .with("mesh", mesh)
            .with("sup_truth", sup_truth)
            .with("alpha1_re", a1.re)
            .with("alpha1_im", a1.im)
            .with("alpha1_true_re", a1_true.re)
            .with("alpha1_true_im", a1_true.im))
    })?;

    let config_echo = serde_json::to_value(config).expect("serializable config");
    let mut report = ExperimentReport::new(StudyKind::Consistency, config_echo, reps, records);

    let mut medians = Vec::new();
    for &n in &config.ladder {
        let cell = format!("n={n}");
        let errs: Vec<f64> = report.records_in(&cell).map(|r| r.estimate).collect();
        let m = median(&errs);
        medians.push(m);
        report.diagnostics.insert(format!("median_sup_error[n={n}]"), m);

        for part in ["re", "im"] {
            let diffs: Vec<f64> = report
                .records_in(&cell)
                .map(|r| r.get(&format!("alpha1_{part}")).unwrap() - r.get(&format!("alpha1_true_{part}")).unwrap())
                .collect();
            let bias = mean(&diffs);
            let se = (sample_variance(&diffs) / diffs.len() as f64).sqrt();
            report.push_check(
                format!("alpha1_{part}_within_3se[n={n}]"),
                bias.abs() <= 3.0 * se,
                format!("mean alpha_1 error {bias:.3e}, standard error {se:.3e}"),
            );
        }
    }

    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    report.push_check(
        "median_sup_error_strictly_decreasing",
        decreasing,
        format!("medians along the ladder: {medians:?}"),
    );
    let last = *config.ladder.last().expect("validated ladder");
    let sup_truth = median(
        &report
            .records_in(&format!("n={last}"))
            .map(|r| r.get("sup_truth").unwrap())
            .collect::<Vec<_>>(),
    );
    let final_median = *medians.last().expect("validated ladder");
    report.diagnostics.insert("sup_truth".into(), sup_truth);
    report.push_check(
        "median_sup_error_below_quarter_of_sup_spot",
        final_median < 0.25 * sup_truth,
        format!(
            "median sup error {final_median:.4e} at n = {last}; bound 0.25 * {sup_truth:.4e} = {:.4e}",
            0.25 * sup_truth
        ),
    );
    Ok(report)
}
