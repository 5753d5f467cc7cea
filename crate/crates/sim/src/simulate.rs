//! Ground-truth paths on a fine grid over `[0, 2π]`, sampling schemes,
//! observation noise and the quadratic-variation-of-time statistic `H_n`.

use std::f64::consts::TAU;

use fouriervol_core::TickSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Coarsest fine-grid step accepted by [`simulate_path`].
pub const MAX_STEP: f64 = TAU / 1000.0;

/// Relative jitter of the jittered scheme, as a fraction of the even spacing.
pub const JITTER: f64 = 0.4;

// RNG stream layout. Every purpose draws from its own ChaCha stream so that
// adding an asset or a noise layer never shifts another consumer's draws.
const STREAM_PRICE: u64 = 0;
const STREAM_PRICE_ORTHOGONAL: u64 = 1;
const STREAM_VARIANCE: u64 = 2;
const STREAM_SAMPLING: u64 = 10;
const STREAM_NOISE: u64 = 20;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VolSpec {
    ConstantVol { sigma: f64 },
    /// `σ²(t) = a + b cos t` on the rescaled clock.
    DeterministicVol { a: f64, b: f64 },
    /// Mean-reverting square-root variance started at `theta`.
    StochasticVol { kappa: f64, theta: f64, xi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    ConstantVol,
    DeterministicVol,
    StochasticVol,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::ConstantVol => "constant_vol",
            ModelKind::DeterministicVol => "deterministic_vol",
            ModelKind::StochasticVol => "stochastic_vol",
        }
    }
}

impl VolSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            VolSpec::ConstantVol { .. } => ModelKind::ConstantVol,
            VolSpec::DeterministicVol { .. } => ModelKind::DeterministicVol,
            VolSpec::StochasticVol { .. } => ModelKind::StochasticVol,
        }
    }

    fn validate(&self, asset: usize) -> Result<()> {
        let bad = |what: &str| Err(SimError::Model(format!("asset {asset}: {what}")));
        match *self {
            VolSpec::ConstantVol { sigma } => {
                if !(sigma.is_finite() && sigma > 0.0) {
                    return bad(&format!("sigma must be positive, got {sigma}"));
                }
            }
            VolSpec::DeterministicVol { a, b } => {
                if !(a.is_finite() && b.is_finite() && a > b.abs()) {
                    return bad(&format!("need a > |b|, got a = {a}, b = {b}"));
                }
            }
            VolSpec::StochasticVol { kappa, theta, xi } => {
                for (name, v) in [("kappa", kappa), ("theta", theta), ("xi", xi)] {
                    if !(v.is_finite() && v > 0.0) {
                        return bad(&format!("{name} must be positive, got {v}"));
                    }
                }
                if 2.0 * kappa * theta < xi * xi {
                    return bad(&format!(
                        "Feller condition 2*kappa*theta >= xi^2 fails: {} < {}",
                        2.0 * kappa * theta,
                        xi * xi
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssetModel {
    pub vol: VolSpec,
    #[serde(default)]
    pub drift: f64,
}

/// One- or two-asset diffusion `dp = b dt + σ dW` with correlated drivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub assets: Vec<AssetModel>,
    /// Correlation of the two price drivers; ignored for a single asset.
    #[serde(default)]
    pub correlation: f64,
}

impl ModelSpec {
    pub fn new(assets: Vec<AssetModel>, correlation: f64) -> Result<Self> {
        let spec = Self { assets, correlation };
        spec.validate()?;
        Ok(spec)
    }

    /// Driftless model with every asset sharing `vol`.
    pub fn uniform(vol: VolSpec, n_assets: usize, correlation: f64) -> Result<Self> {
        Self::new(vec![AssetModel { vol, drift: 0.0 }; n_assets], correlation)
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn kind(&self) -> ModelKind {
        self.assets[0].vol.kind()
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.assets.len()) {
            return Err(SimError::Model(format!(
                "asset count must be 1 or 2, got {}",
                self.assets.len()
            )));
        }
        let kind = self.kind();
        for (i, asset) in self.assets.iter().enumerate() {
            asset.vol.validate(i)?;
            if asset.vol.kind() != kind {
                return Err(SimError::Model(format!(
                    "all assets must share one model kind, found {} and {}",
                    kind.as_str(),
                    asset.vol.kind().as_str()
                )));
            }
            if !asset.drift.is_finite() {
                return Err(SimError::Model(format!("asset {i}: drift must be finite")));
            }
        }
        if !(self.correlation.is_finite() && (-1.0..=1.0).contains(&self.correlation)) {
            return Err(SimError::Model(format!(
                "correlation must lie in [-1, 1], got {}",
                self.correlation
            )));
        }
        Ok(())
    }
}

/// Simulated path on the fine grid `t_m = m · step`, `m = 0..=n_steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinePath {
    pub step: f64,
    pub n_steps: usize,
    /// One array per asset.
    pub log_prices: Vec<Vec<f64>>,
    /// True `Σ^{ij}` for the pairs listed by [`FinePath::pairs`].
    pub spot_cov: Vec<Vec<f64>>,
    /// Trapezoid integral of each `spot_cov` entry over `[0, 2π]`.
    pub integrated_cov: Vec<f64>,
}

impl FinePath {
    pub fn n_assets(&self) -> usize {
        self.log_prices.len()
    }

    /// `(i, j)` pairs with `i <= j`, in storage order: (0,0), (0,1), (1,1).
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        pairs(self.n_assets())
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.pairs()
            .iter()
            .position(|&p| p == (i, j))
            .unwrap_or_else(|| panic!("no pair ({i}, {j}) for {} assets", self.n_assets()))
    }

    pub fn spot(&self, i: usize, j: usize) -> &[f64] {
        &self.spot_cov[self.pair_index(i, j)]
    }

    pub fn integrated(&self, i: usize, j: usize) -> f64 {
        self.integrated_cov[self.pair_index(i, j)]
    }

    pub fn time(&self, m: usize) -> f64 {
        m as f64 * self.step
    }

    /// Index of the last fine-grid node at or before `t`.
    pub fn index_at(&self, t: f64) -> usize {
        ((t / self.step + 1e-9).floor().max(0.0) as usize).min(self.n_steps)
    }

    pub fn price_at(&self, asset: usize, t: f64) -> f64 {
        self.log_prices[asset][self.index_at(t)]
    }

    pub fn spot_at(&self, i: usize, j: usize, t: f64) -> f64 {
        self.spot(i, j)[self.index_at(t)]
    }
}

pub fn pairs(n_assets: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n_assets {
        for j in i..n_assets {
            out.push((i, j));
        }
    }
    out
}

fn trapezoid(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().sum();
    step * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// Euler–Maruyama simulation of `model` on a fine grid of spacing at most
/// `step` (the grid is refined so that it divides `2π` exactly).
///
/// Stochastic variances use full truncation: the variance enters drift and
/// diffusion through `max(v, 0)`, and that value is what `spot_cov` records.
pub fn simulate_path(model: &ModelSpec, step: f64, seed: u64) -> Result<FinePath> {
    model.validate()?;
    if !(step.is_finite() && step > 0.0 && step <= MAX_STEP * (1.0 + 1e-12)) {
        return Err(SimError::Model(format!(
            "fine step must lie in (0, 2*pi/1000], got {step}"
        )));
    }
    let n_steps = (TAU / step - 1e-9).ceil() as usize;
    let dt = TAU / n_steps as f64;
    let sqrt_dt = dt.sqrt();
    let n_assets = model.n_assets();
    let rho = model.correlation;
    let rho_perp = (1.0 - rho * rho).max(0.0).sqrt();

    let mut price_rng = stream(seed, STREAM_PRICE);
    let mut perp_rng = stream(seed, STREAM_PRICE_ORTHOGONAL);
    let mut var_rngs: Vec<ChaCha8Rng> = (0..n_assets)
        .map(|a| stream(seed, STREAM_VARIANCE + a as u64))
        .collect();

    let mut state: Vec<f64> = model
        .assets
        .iter()
        .map(|a| match a.vol {
            VolSpec::StochasticVol { theta, .. } => theta,
            _ => 0.0,
        })
        .collect();

    let mut prices = vec![Vec::with_capacity(n_steps + 1); n_assets];
    let mut variances = vec![Vec::with_capacity(n_steps + 1); n_assets];
    let mut p = vec![0.0; n_assets];

    for m in 0..=n_steps {
        let t = m as f64 * dt;
        for (a, asset) in model.assets.iter().enumerate() {
            let v = match asset.vol {
                VolSpec::ConstantVol { sigma } => sigma * sigma,
                VolSpec::DeterministicVol { a, b } => a + b * t.cos(),
                VolSpec::StochasticVol { .. } => state[a].max(0.0),
            };
            variances[a].push(v);
            prices[a].push(p[a]);
        }
        if m == n_steps {
            break;
        }
        let z1: f64 = price_rng.sample(StandardNormal);
        let z_perp: f64 = if n_assets == 2 { perp_rng.sample(StandardNormal) } else { 0.0 };
        for (a, asset) in model.assets.iter().enumerate() {
            let z = if a == 0 { z1 } else { rho * z1 + rho_perp * z_perp };
            let v = variances[a][m];
            p[a] += asset.drift * dt + v.sqrt() * sqrt_dt * z;
            if let VolSpec::StochasticVol { kappa, theta, xi } = asset.vol {
                let zv: f64 = var_rngs[a].sample(StandardNormal);
                state[a] += kappa * (theta - v) * dt + xi * v.sqrt() * sqrt_dt * zv;
            }
        }
    }

    let mut spot_cov = Vec::new();
    for (i, j) in pairs(n_assets) {
        if i == j {
            spot_cov.push(variances[i].clone());
        } else {
            spot_cov.push(
                variances[i]
                    .iter()
                    .zip(&variances[j])
                    .map(|(x, y)| rho * (x * y).sqrt())
                    .collect(),
            );
        }
    }
    let integrated_cov = spot_cov.iter().map(|s| trapezoid(s, dt)).collect();
    Ok(FinePath {
        step: dt,
        n_steps,
        log_prices: prices,
        spot_cov,
        integrated_cov,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplingKind {
    /// `t_j = 2πj/n`.
    Even { n: usize },
    /// Even grid with interior points moved by up to ±0.4 of the spacing.
    Jittered { n: usize },
    /// Exponential gaps of rate `intensity` per unit of rescaled time.
    Poisson { intensity: f64 },
}

impl SamplingKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SamplingKind::Even { n } | SamplingKind::Jittered { n } if n == 0 => {
                Err(SimError::Config("sampling needs n >= 1".into()))
            }
            SamplingKind::Poisson { intensity } if !(intensity.is_finite() && intensity > 0.0) => Err(
                SimError::Config(format!("Poisson intensity must be positive, got {intensity}")),
            ),
            _ => Ok(()),
        }
    }

    /// Expected number of return intervals.
    pub fn expected_intervals(&self) -> f64 {
        match *self {
            SamplingKind::Even { n } | SamplingKind::Jittered { n } => n as f64,
            SamplingKind::Poisson { intensity } => intensity * TAU + 1.0,
        }
    }

    /// Whether every time lies on the grid `2πj/n`.
    pub fn is_even(&self) -> bool {
        matches!(self, SamplingKind::Even { .. })
    }
}

/// Per-asset sampling; a single entry applies to every asset. Assets are
/// sampled independently, hence asynchronously unless the scheme is even.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingScheme {
    pub assets: Vec<SamplingKind>,
}

impl SamplingScheme {
    pub fn uniform(kind: SamplingKind) -> Self {
        Self { assets: vec![kind] }
    }

    pub fn kind_for(&self, asset: usize) -> SamplingKind {
        self.assets[asset.min(self.assets.len() - 1)]
    }

    pub fn validate(&self) -> Result<()> {
        if self.assets.is_empty() {
            return Err(SimError::Config("sampling scheme lists no assets".into()));
        }
        self.assets.iter().try_for_each(|k| k.validate())
    }
}

/// Observation times in `[0, 2π]` for one asset; `0` and `2π` are always
/// included.
pub fn draw_times(kind: SamplingKind, seed: u64, asset: usize) -> Result<Vec<f64>> {
    kind.validate()?;
    let mut rng = stream(seed, STREAM_SAMPLING + asset as u64);
    let times = match kind {
        SamplingKind::Even { n } => (0..=n).map(|j| TAU * j as f64 / n as f64).collect(),
        SamplingKind::Jittered { n } => {
            let h = TAU / n as f64;
            let mut t = Vec::with_capacity(n + 1);
            t.push(0.0);
            for j in 1..n {
                let u: f64 = rng.gen_range(-JITTER..JITTER);
                t.push((j as f64 + u) * h);
            }
            t.push(TAU);
            t
        }
        SamplingKind::Poisson { intensity } => {
            let gaps = Exp::new(intensity).expect("validated intensity");
            let mut t = vec![0.0];
            let mut now = 0.0;
            loop {
                now += rng.sample(gaps);
                if now >= TAU {
                    break;
                }
                t.push(now);
            }
            let count = t.len() - 1;
            if count < 2 {
                return Err(SimError::Resample { asset, count });
            }
            t.push(TAU);
            t
        }
    };
    Ok(times)
}

/// Reads `path` at `times` by previous-tick lookup on the fine grid.
pub fn observe(path: &FinePath, asset: usize, times: Vec<f64>) -> TickSeries {
    let prices = times.iter().map(|&t| path.price_at(asset, t)).collect();
    TickSeries::new(asset_id(asset), times, prices).expect("aligned lengths")
}

pub fn asset_id(asset: usize) -> String {
    format!("asset{}", asset + 1)
}

/// One [`TickSeries`] per asset of `path`, on the raw clock `[0, 2π]`.
pub fn sample_path(path: &FinePath, scheme: &SamplingScheme, seed: u64) -> Result<Vec<TickSeries>> {
    scheme.validate()?;
    (0..path.n_assets())
        .map(|a| Ok(observe(path, a, draw_times(scheme.kind_for(a), seed, a)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    #[default]
    None,
    /// Independent `N(0, std²)` added to every observed log-price.
    IidGaussian { std: f64 },
}

impl NoiseSpec {
    pub fn std(&self) -> f64 {
        match *self {
            NoiseSpec::None => 0.0,
            NoiseSpec::IidGaussian { std } => std,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.std();
        if !(s.is_finite() && s >= 0.0) {
            return Err(SimError::Config(format!("noise std must be >= 0, got {s}")));
        }
        Ok(())
    }
}

pub fn add_noise(series: &TickSeries, noise: &NoiseSpec, seed: u64) -> Result<TickSeries> {
    noise.validate()?;
    let std = noise.std();
    if std == 0.0 {
        return Ok(series.clone());
    }
    let mut rng = stream(seed, STREAM_NOISE);
    let log_prices = series
        .log_prices
        .iter()
        .map(|&p| p + std * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(TickSeries {
        asset_id: series.asset_id.clone(),
        times: series.times.clone(),
        log_prices,
    })
}

/// Quadratic variation of time up to `t`.
///
/// Univariate: `Σ_{t_{j+1} ≤ t} (t_{j+1} - t_j)² / (2π/k_n)` with `k_n` the
/// number of intervals. Bivariate: `n/(2π) Σ` of squared overlap lengths of
/// intersecting interval pairs whose overlap ends by `t`, with
/// `n = min(n₁, n₂)` when the interval counts differ.
pub fn h_n_statistic(times1: &[f64], times2: Option<&[f64]>, t: f64) -> f64 {
    match times2 {
        None => {
            let k_n = times1.len().saturating_sub(1);
            let sum: f64 = times1
                .windows(2)
                .take_while(|w| w[1] <= t)
                .map(|w| (w[1] - w[0]).powi(2))
                .sum();
            sum * k_n as f64 / TAU
        }
        Some(times2) => {
            let n = times1.len().min(times2.len()).saturating_sub(1);
            let (mut i, mut j) = (0, 0);
            let mut sum = 0.0;
            while i + 1 < times1.len() && j + 1 < times2.len() {
                let left = times1[i].max(times2[j]);
                let right = times1[i + 1].min(times2[j + 1]);
                if left < right && right <= t {
                    sum += (right - left).powi(2);
                }
                if times1[i + 1] < times2[j + 1] {
                    i += 1;
                } else if times2[j + 1] < times1[i + 1] {
                    j += 1;
                } else {
                    i += 1;
                    j += 1;
                }
            }
            sum * n as f64 / TAU
        }
    }
}
