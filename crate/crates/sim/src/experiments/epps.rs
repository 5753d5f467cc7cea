//! Previous-tick realized covariance over a ladder of synchronization steps,
//! next to the Fourier and Hayashi–Yoshida estimates, under asynchronous
//! Poisson trading.

use fouriervol_core::{
    hayashi_yoshida, integrated_covolatility_from_coeffs, realized_covariance_previous_tick, return_fourier_coeffs,
    SyncSpec,
};
use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Record, StudyKind};
use super::{derive_seed, fine_step, rescale_all, run_indexed, CutoffRule};
use crate::error::{Result, SimError};
use crate::simulate::{sample_path, simulate_path, ModelSpec, SamplingKind, SamplingScheme};

const TAG: u64 = 5;
pub const FOURIER_CELL: &str = "fourier";
pub const HY_CELL: &str = "hayashi_yoshida";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EppsConfig {
    pub model: ModelSpec,
    /// Poisson arrival rate per asset, per unit of rescaled time.
    pub intensity: f64,
    /// Synchronization steps of the previous-tick estimator.
    pub deltas: Vec<f64>,
    pub cutoff: CutoffRule,
    pub replications: usize,
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

impl EppsConfig {
    pub fn new(model: ModelSpec, intensity: f64, deltas: Vec<f64>, replications: usize, seed: u64) -> Self {
        Self {
            model,
            intensity,
            deltas,
            cutoff: CutoffRule::Auto,
            replications,
            seed,
            threads: None,
        }
    }

    fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.model.n_assets() != 2 {
            return Err(SimError::Config("the Epps study needs a two-asset model".into()));
        }
        SamplingKind::Poisson { intensity: self.intensity }.validate()?;
        if self.deltas.len() < 2 || self.deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(SimError::Config("the Epps study needs at least 2 positive deltas".into()));
        }
        if self.replications < 2 {
            return Err(SimError::Config("the Epps study needs at least 2 replications".into()));
        }
        Ok(())
    }
}

pub fn previous_tick_cell(delta: f64) -> String {
    format!("previous_tick[delta={delta:.6}]")
}

pub fn epps_study(config: &EppsConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let kind = SamplingKind::Poisson {
        intensity: config.intensity,
    };
    let scheme = SamplingScheme::uniform(kind);
    let step = fine_step(kind);
    let reps = config.replications;

    let nested = run_indexed(reps, config.threads, |rep| {
        let seed = derive_seed(config.seed, &[TAG, rep as u64]);
        let path = simulate_path(&config.model, step, seed)?;
        let raw = sample_path(&path, &scheme, seed)?;
        let series = rescale_all(&raw)?;
        let truth = path.integrated(0, 1);
        let mut out = Vec::with_capacity(config.deltas.len() + 2);
        for &delta in &config.deltas {
            let rc = realized_covariance_previous_tick(&raw[0], &raw[1], SyncSpec::new(delta))?;
            out.push(Record::new(rep, seed, previous_tick_cell(delta), rc, truth).with("delta", delta));
        }
        let mesh = series[0].mesh().max(series[1].mesh());
        let n_returns = series[0].n_returns().min(series[1].n_returns());
        let n_freq = config.cutoff.resolve(mesh, n_returns)?;
        let c1 = return_fourier_coeffs(&series[0], n_freq);
        let c2 = return_fourier_coeffs(&series[1], n_freq);
        let fourier = integrated_covolatility_from_coeffs(&c1, &c2, n_freq)?;
        out.push(
            Record::new(rep, seed, FOURIER_CELL, fourier, truth)
                .with("N", n_freq as f64)
                .with("mesh", mesh),
        );
        let hy = hayashi_yoshida(&series[0], &series[1])?;
        out.push(Record::new(rep, seed, HY_CELL, hy, truth));
        Ok(out)
    })?;
    let records: Vec<Record> = nested.into_iter().flatten().collect();

    let config_echo = serde_json::to_value(config).expect("serializable config");
    let mut report = ExperimentReport::new(StudyKind::Epps, config_echo, reps, records);

    let finest = config.deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let coarsest = config.deltas.iter().copied().fold(0.0, f64::max);
    let fine_bias = report.cell(&previous_tick_cell(finest)).expect("cell").bias;
    let coarse_bias = report.cell(&previous_tick_cell(coarsest)).expect("cell").bias;
    report.push_check(
        "previous_tick_attenuates_at_fine_delta",
        fine_bias.abs() > coarse_bias.abs(),
        format!(
            "mean bias {fine_bias:.4e} at delta = {finest:.5}; {coarse_bias:.4e} at delta = {coarsest:.5}"
        ),
    );
    for (name, cell) in [("fourier_unbiased_within_3se", FOURIER_CELL), ("hayashi_yoshida_unbiased_within_3se", HY_CELL)] {
        let s = report.cell(cell).expect("cell").clone();
        report.push_check(
            name,
            s.bias.abs() <= 3.0 * s.std_error,
            format!("mean bias {:.4e}, standard error {:.4e}", s.bias, s.std_error),
        );
    }
    Ok(report)
}
