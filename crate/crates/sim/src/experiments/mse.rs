//! Mean squared error of the integrated estimate over a grid of cutoffs,
//! sample sizes and noise levels.

use fouriervol_core::{integrated_covolatility_from_coeffs, integrated_volatility, return_fourier_coeffs, select_cutoff};
use serde::{Deserialize, Serialize};

use super::report::{mean, ExperimentReport, Record, StudyKind};
use super::{derive_seed, fine_step, ols_slope, rescale_all, run_indexed, SchemeFamily};
use crate::error::{Result, SimError};
use crate::simulate::{add_noise, draw_times, sample_path, simulate_path, ModelSpec, NoiseSpec, SamplingScheme};

const TAG: u64 = 3;
const NOISE_TAG: u64 = 4;

/// Top of a geometric cutoff grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperCutoff {
    /// `N* · factor`.
    Factor(f64),
    /// `(n-1)/2`.
    Nyquist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutoffGrid {
    /// Log-spaced around `N* = select_cutoff(ρ̄)`, from `N* · lower_factor`
    /// up to `upper`, always containing `N*`.
    Geometric {
        points_per_decade: usize,
        lower_factor: f64,
        upper: UpperCutoff,
    },
    Explicit { values: Vec<usize> },
}

impl Default for CutoffGrid {
    fn default() -> Self {
        CutoffGrid::Geometric {
            points_per_decade: 8,
            lower_factor: 10f64.sqrt().recip(),
            upper: UpperCutoff::Factor(10f64.sqrt()),
        }
    }
}

impl CutoffGrid {
    /// Sorted, deduplicated cutoffs for a sample of `n` intervals.
    pub fn resolve(&self, n_star: usize, n: usize) -> Result<Vec<usize>> {
        let nyquist = (n.saturating_sub(1) / 2).max(1);
        let mut values = match self {
            CutoffGrid::Explicit { values } => values.clone(),
            &CutoffGrid::Geometric {
                points_per_decade,
                lower_factor,
                upper,
            } => {
                if points_per_decade == 0 || !(lower_factor > 0.0 && lower_factor <= 1.0) {
                    return Err(SimError::Config(
                        "geometric cutoff grid needs points_per_decade >= 1 and lower_factor in (0, 1]".into(),
                    ));
                }
                let top = match upper {
                    UpperCutoff::Factor(f) if f >= 1.0 => n_star as f64 * f,
                    UpperCutoff::Factor(f) => {
                        return Err(SimError::Config(format!("upper cutoff factor must be >= 1, got {f}")))
                    }
                    UpperCutoff::Nyquist => nyquist as f64,
                };
                let base = n_star as f64;
                let lo = (lower_factor.log10() * points_per_decade as f64).floor() as i64;
                let hi = ((top / base).log10() * points_per_decade as f64).ceil() as i64;
                let mut v: Vec<usize> = (lo..=hi)
                    .map(|j| base * 10f64.powf(j as f64 / points_per_decade as f64))
                    .filter(|&x| x >= base * lower_factor * (1.0 - 1e-9) && x <= top * (1.0 + 1e-9))
                    .map(|x| x.round().max(1.0) as usize)
                    .collect();
                v.push(n_star);
                if matches!(upper, UpperCutoff::Nyquist) {
                    v.push(nyquist);
                }
                v
            }
        };
        values.sort_unstable();
        values.dedup();
        if values.first() == Some(&0) {
            return Err(SimError::Config("cutoffs must be >= 1".into()));
        }
        let (lo, hi) = match (values.first(), values.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Err(SimError::Config("empty cutoff list".into())),
        };
        // Integer cutoffs carry up to half a unit of rounding at each end.
        if hi as f64 + 0.5 < 10.0 * (lo as f64 - 0.5) || n_star < lo || n_star > hi {
            return Err(SimError::Config(format!(
                "cutoff list [{lo}, {hi}] must span a decade around select_cutoff = {n_star}"
            )));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseConfig {
    pub model: ModelSpec,
    pub family: SchemeFamily,
    pub n_ladder: Vec<usize>,
    pub cutoffs: CutoffGrid,
    /// Noise standard deviations; `0` is the noiseless case.
    pub noise_levels: Vec<f64>,
    pub pair: (usize, usize),
    pub replications: usize,
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

impl MseConfig {
    pub fn new(model: ModelSpec, n_ladder: Vec<usize>, replications: usize, seed: u64) -> Self {
        Self {
            model,
            family: SchemeFamily::Even,
            n_ladder,
            cutoffs: CutoffGrid::default(),
            noise_levels: vec![0.0],
            pair: (0, 0),
            replications,
            seed,
            threads: None,
        }
    }

    fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.n_ladder.is_empty() || self.n_ladder.contains(&0) {
            return Err(SimError::Config("n_ladder must list positive sample sizes".into()));
        }
        if self.noise_levels.is_empty() {
            return Err(SimError::Config("noise_levels must not be empty".into()));
        }
        for &eta in &self.noise_levels {
            NoiseSpec::IidGaussian { std: eta }.validate()?;
        }
        let (i, j) = self.pair;
        if i.max(j) >= self.model.n_assets() {
            return Err(SimError::Config(format!("pair ({i}, {j}) exceeds the asset count")));
        }
        if self.replications == 0 {
            return Err(SimError::Config("replications must be positive".into()));
        }
        Ok(())
    }
}

fn cell_name(n: usize, eta: f64, n_freq: usize) -> String {
    format!("n={n},eta={eta},N={n_freq}")
}

pub fn mse_sweep(config: &MseConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let (pi, pj) = config.pair;
    let reps = config.replications;
    let rep_seed = |li: usize, rep: usize| derive_seed(config.seed, &[TAG, li as u64, rep as u64]);

    // Mean realized mesh per ladder point, from the same sampling draws the
    // replications will make.
    let mut meshes = Vec::with_capacity(config.n_ladder.len());
    let mut grids = Vec::with_capacity(config.n_ladder.len());
    let mut stars = Vec::with_capacity(config.n_ladder.len());
    for (li, &n) in config.n_ladder.iter().enumerate() {
        let kind = config.family.at(n);
        let per_rep = run_indexed(reps, config.threads, |rep| {
            let seed = rep_seed(li, rep);
            let mesh = |asset: usize| -> Result<f64> {
                let t = draw_times(kind, seed, asset)?;
                Ok(t.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max))
            };
            Ok(mesh(pi)?.max(mesh(pj)?))
        })?;
        let rho = mean(&per_rep);
        let n_star = select_cutoff(rho)?;
        meshes.push(rho);
        stars.push(n_star);
        grids.push(config.cutoffs.resolve(n_star, kind.expected_intervals().floor() as usize)?);
    }

    let units = config.n_ladder.len() * reps;
    let nested = run_indexed(units, config.threads, |unit| {
        let (li, rep) = (unit / reps, unit % reps);
        let n = config.n_ladder[li];
        let seed = rep_seed(li, rep);
        let kind = config.family.at(n);
        let path = simulate_path(&config.model, fine_step(kind), seed)?;
        let clean = sample_path(&path, &SamplingScheme::uniform(kind), seed)?;
        let truth = path.integrated(pi, pj);
        let top = *grids[li].last().expect("resolved grid is nonempty");
        let mut out = Vec::with_capacity(config.noise_levels.len() * grids[li].len());
        for (ei, &eta) in config.noise_levels.iter().enumerate() {
            let noise = NoiseSpec::IidGaussian { std: eta };
            let noisy = clean
                .iter()
                .enumerate()
                .map(|(a, s)| add_noise(s, &noise, derive_seed(seed, &[NOISE_TAG, ei as u64, a as u64])))
                .collect::<Result<Vec<_>>>()?;
            let series = rescale_all(&noisy)?;
            let c1 = return_fourier_coeffs(&series[pi], top);
            let c2 = if pi == pj { None } else { Some(return_fourier_coeffs(&series[pj], top)) };
            for &n_freq in &grids[li] {
                let estimate = match &c2 {
                    None => integrated_volatility(&c1, n_freq)?,
                    Some(c2) => integrated_covolatility_from_coeffs(&c1, c2, n_freq)?,
                };
                out.push(
                    Record::new(rep, seed, cell_name(n, eta, n_freq), estimate, truth)
                        .with("n", n as f64)
                        .with("eta", eta)
                        .with("N", n_freq as f64),
                );
            }
        }
        Ok(out)
    })?;
    let records: Vec<Record> = nested.into_iter().flatten().collect();

    let config_echo = serde_json::to_value(config).expect("serializable config");
    let mut report = ExperimentReport::new(StudyKind::MseSweep, config_echo, reps, records);

    let mut slope_x = Vec::new();
    let mut slope_y = Vec::new();
    for (li, &n) in config.n_ladder.iter().enumerate() {
        report.diagnostics.insert(format!("mean_mesh[n={n}]"), meshes[li]);
        report.diagnostics.insert(format!("select_cutoff[n={n}]"), stars[li] as f64);
        for &eta in &config.noise_levels {
            let curve: Vec<(usize, f64)> = grids[li]
                .iter()
                .map(|&nf| (nf, report.cell(&cell_name(n, eta, nf)).expect("cell present").mse))
                .collect();
            let &(best_n, best_mse) = curve
                .iter()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty curve");
            let &(max_n, max_mse) = curve.last().expect("nonempty curve");
            let tag = format!("n={n},eta={eta}");
            report.diagnostics.insert(format!("best_N[{tag}]"), best_n as f64);
            report.diagnostics.insert(format!("best_mse[{tag}]"), best_mse);
            if eta == 0.0 {
                let star_mse = curve.iter().find(|c| c.0 == stars[li]).expect("N* in grid").1;
                let ratio = star_mse / best_mse;
                report.diagnostics.insert(format!("select_cutoff_mse_ratio[n={n}]"), ratio);
                report.push_check(
                    format!("select_cutoff_within_factor_4[{tag}]"),
                    ratio <= 4.0,
                    format!(
                        "MSE at N* = {} is {star_mse:.4e}; minimum {best_mse:.4e} at N = {best_n}; ratio {ratio:.3}",
                        stars[li]
                    ),
                );
                slope_x.push(meshes[li].ln());
                slope_y.push(best_mse.ln());
            } else {
                report.push_check(
                    format!("interior_minimum[{tag}]"),
                    best_n < max_n && best_mse < max_mse,
                    format!("minimum {best_mse:.4e} at N = {best_n}; MSE {max_mse:.4e} at max N = {max_n}"),
                );
            }
        }
    }
    if slope_x.len() >= 2 {
        let slope = ols_slope(&slope_x, &slope_y);
        report.diagnostics.insert("best_mse_slope".into(), slope);
        report.push_check(
            "best_mse_slope_in_range",
            (0.5..=0.9).contains(&slope),
            format!("log-log slope of best-N MSE on mean mesh {slope:.4}; accepted [0.5, 0.9]"),
        );
    }
    Ok(report)
}
