//! Flat `key = value` configuration files.
//!
//! Keys are either bare (`seed = 7`) or carry one section prefix
//! (`model.kind = "stochastic_vol"`, or the same key under a `[model]`
//! header). Values are TOML scalars or arrays of scalars; an array gives one
//! value per asset. Every key must be consumed by the command that reads the
//! file, so misspelled keys are reported instead of silently ignored.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use fouriervol_sim::experiments::{fine_step, SchemeFamily};
use fouriervol_sim::{
    AssetModel, CltConfig, ConsistencyConfig, CutoffGrid, CutoffRule, EppsConfig, ModelSpec, MseConfig, NoiseSpec,
    SamplingKind, SamplingScheme, StudyConfig, TestFunction, UpperCutoff, VolSpec,
};
use toml::Value;

use crate::error::{CliError, Result};

#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, Value>,
    used: RefCell<BTreeSet<String>>,
}

fn bad(key: &str, what: &str) -> CliError {
    CliError::Config(format!("{key}: {what}"))
}

impl ConfigFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        let mut entries = BTreeMap::new();
        for (key, value) in table {
            match value {
                Value::Table(section) => {
                    for (sub, v) in section {
                        let full = format!("{key}.{sub}");
                        if matches!(v, Value::Table(_)) {
                            return Err(bad(&full, "nesting deeper than one section is not supported"));
                        }
                        entries.insert(full, v);
                    }
                }
                v => {
                    entries.insert(key, v);
                }
            }
        }
        Ok(Self {
            entries,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<&Value> {
        let v = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v)
    }

    pub fn str(&self, key: &str) -> Result<Option<String>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(bad(key, "expected a string")),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => scalar_f64(key, v).map(Some),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => scalar_usize(key, v).map(Some),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(bad(key, "expected a nonnegative integer")),
        }
    }

    /// A scalar or an array of numbers.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items.iter().map(|v| scalar_f64(key, v)).collect::<Result<_>>().map(Some),
            Some(v) => Ok(Some(vec![scalar_f64(key, v)?])),
        }
    }

    pub fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items.iter().map(|v| scalar_usize(key, v)).collect::<Result<_>>().map(Some),
            Some(v) => Ok(Some(vec![scalar_usize(key, v)?])),
        }
    }

    pub fn require<T>(&self, key: &str, value: Result<Option<T>>) -> Result<T> {
        value?.ok_or_else(|| bad(key, "missing required key"))
    }

    /// Errors on keys nobody read.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .filter(|k| !used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!("unrecognized keys: {}", unknown.join(", "))))
        }
    }
}

fn scalar_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(bad(key, "expected a number")),
    }
}

fn scalar_usize(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(bad(key, "expected a nonnegative integer")),
    }
}

/// Entry `asset` of a per-asset list; a single value applies to every asset.
fn per_asset(key: &str, values: &[f64], asset: usize, n_assets: usize) -> Result<f64> {
    match values.len() {
        1 => Ok(values[0]),
        n if n == n_assets => Ok(values[asset]),
        n => Err(bad(key, &format!("expected 1 or {n_assets} values, found {n}"))),
    }
}

pub fn parse_cutoff_rule(text: &str) -> Result<CutoffRule> {
    match text.trim() {
        "auto" => Ok(CutoffRule::Auto),
        "nyquist" => Ok(CutoffRule::Nyquist),
        other => other
            .parse::<usize>()
            .map(CutoffRule::Fixed)
            .map_err(|_| CliError::Config(format!("cutoff must be auto, nyquist or an integer, got {other:?}"))),
    }
}

fn cutoff_key(cfg: &ConfigFile, key: &str) -> Result<Option<CutoffRule>> {
    match cfg.raw(key) {
        None => Ok(None),
        Some(Value::String(s)) => parse_cutoff_rule(s).map(Some),
        Some(v) => scalar_usize(key, v).map(|n| Some(CutoffRule::Fixed(n))),
    }
}

/// `model.*`: kind, assets, sigma | a, b | kappa, theta, xi, drift,
/// correlation.
pub fn model_spec(cfg: &ConfigFile) -> Result<ModelSpec> {
    let kind = cfg.require("model.kind", cfg.str("model.kind"))?;
    let params: &[&str] = match kind.as_str() {
        "constant_vol" => &["sigma"],
        "deterministic_vol" => &["a", "b"],
        "stochastic_vol" => &["kappa", "theta", "xi"],
        other => return Err(bad("model.kind", &format!("unknown model kind {other:?}"))),
    };
    let mut lists = Vec::new();
    for p in params {
        let key = format!("model.{p}");
        lists.push((key.clone(), cfg.require(&key, cfg.f64_list(&key))?));
    }
    let drift = cfg.f64_list("model.drift")?.unwrap_or_else(|| vec![0.0]);
    let longest = lists.iter().map(|l| l.1.len()).chain([drift.len()]).max().unwrap_or(1);
    let n_assets = cfg.usize("model.assets")?.unwrap_or(longest);
    let correlation = cfg.f64("model.correlation")?.unwrap_or(0.0);

    let mut assets = Vec::with_capacity(n_assets);
    for a in 0..n_assets {
        let v = |i: usize| per_asset(&lists[i].0, &lists[i].1, a, n_assets);
        let vol = match kind.as_str() {
            "constant_vol" => VolSpec::ConstantVol { sigma: v(0)? },
            "deterministic_vol" => VolSpec::DeterministicVol { a: v(0)?, b: v(1)? },
            _ => VolSpec::StochasticVol {
                kappa: v(0)?,
                theta: v(1)?,
                xi: v(2)?,
            },
        };
        assets.push(AssetModel {
            vol,
            drift: per_asset("model.drift", &drift, a, n_assets)?,
        });
    }
    Ok(ModelSpec::new(assets, correlation)?)
}

fn sampling_kinds(cfg: &ConfigFile, prefix: &str, n_assets: usize) -> Result<Vec<SamplingKind>> {
    let kind_key = format!("{prefix}.kind");
    let kind = cfg.require(&kind_key, cfg.str(&kind_key))?;
    let (param, make): (&str, fn(f64) -> SamplingKind) = match kind.as_str() {
        "even" => ("n", |n| SamplingKind::Even { n: n as usize }),
        "jittered" => ("n", |n| SamplingKind::Jittered { n: n as usize }),
        "poisson" => ("intensity", |l| SamplingKind::Poisson { intensity: l }),
        other => return Err(bad(&kind_key, &format!("unknown sampling kind {other:?}"))),
    };
    let key = format!("{prefix}.{param}");
    let values = cfg.require(&key, cfg.f64_list(&key))?;
    if param == "n" && values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
        return Err(bad(&key, "expected positive integers"));
    }
    (0..n_assets.max(1))
        .map(|a| per_asset(&key, &values, a, n_assets).map(make))
        .collect()
}

/// `sampling.*`: kind (even | jittered | poisson) with `n` or `intensity`.
pub fn sampling_scheme(cfg: &ConfigFile, n_assets: usize) -> Result<SamplingScheme> {
    let scheme = SamplingScheme {
        assets: sampling_kinds(cfg, "sampling", n_assets)?,
    };
    scheme.validate()?;
    Ok(scheme)
}

/// `noise.*`: kind (none | iid_gaussian) and std.
pub fn noise_spec(cfg: &ConfigFile) -> Result<NoiseSpec> {
    let kind = cfg.str("noise.kind")?;
    let std = cfg.f64("noise.std")?;
    let spec = match (kind.as_deref(), std) {
        (None | Some("none"), None) => NoiseSpec::None,
        (Some("none"), Some(_)) => return Err(bad("noise.std", "given for noise.kind = \"none\"")),
        (None | Some("iid_gaussian"), Some(std)) => NoiseSpec::IidGaussian { std },
        (Some("iid_gaussian"), None) => return Err(bad("noise.std", "missing required key")),
        (Some(other), _) => return Err(bad("noise.kind", &format!("unknown noise kind {other:?}"))),
    };
    spec.validate()?;
    Ok(spec)
}

/// `simulate.step`, defaulting to the finest step any asset's scheme asks for.
pub fn simulation_step(cfg: &ConfigFile, scheme: &SamplingScheme) -> Result<f64> {
    match cfg.f64("simulate.step")? {
        Some(step) => Ok(step),
        None => Ok(scheme.assets.iter().map(|k| fine_step(*k)).fold(f64::INFINITY, f64::min)),
    }
}

fn family(cfg: &ConfigFile) -> Result<Option<SchemeFamily>> {
    Ok(match cfg.str("study.family")?.as_deref() {
        None => None,
        Some("even") => Some(SchemeFamily::Even),
        Some("jittered") => Some(SchemeFamily::Jittered),
        Some("poisson") => Some(SchemeFamily::Poisson),
        Some(other) => return Err(bad("study.family", &format!("unknown family {other:?}"))),
    })
}

fn pair(cfg: &ConfigFile) -> Result<Option<(usize, usize)>> {
    match cfg.usize_list("study.pair")? {
        None => Ok(None),
        Some(p) if p.len() == 2 => Ok(Some((p[0], p[1]))),
        Some(_) => Err(bad("study.pair", "expected two asset indices")),
    }
}

fn cutoff_grid(cfg: &ConfigFile) -> Result<CutoffGrid> {
    if let Some(values) = cfg.usize_list("study.cutoffs")? {
        return Ok(CutoffGrid::Explicit { values });
    }
    let CutoffGrid::Geometric {
        mut points_per_decade,
        mut lower_factor,
        mut upper,
    } = CutoffGrid::default()
    else {
        unreachable!("default cutoff grid is geometric")
    };
    if let Some(p) = cfg.usize("study.points_per_decade")? {
        points_per_decade = p;
    }
    if let Some(f) = cfg.f64("study.lower_factor")? {
        lower_factor = f;
    }
    match cfg.raw("study.upper") {
        None => {}
        Some(Value::String(s)) if s == "nyquist" => upper = UpperCutoff::Nyquist,
        Some(v) => upper = UpperCutoff::Factor(scalar_f64("study.upper", v)?),
    }
    Ok(CutoffGrid::Geometric {
        points_per_decade,
        lower_factor,
        upper,
    })
}

/// `study.*` together with `model.*` and the master seed.
pub fn study_config(cfg: &ConfigFile, seed: u64) -> Result<StudyConfig> {
    let kind = cfg.require("study.kind", cfg.str("study.kind"))?;
    let model = model_spec(cfg)?;
    let reps = cfg.require("study.replications", cfg.usize("study.replications"))?;
    let threads = cfg.usize("study.threads")?;
    let mut study = match kind.as_str() {
        "consistency" => {
            let ladder = cfg.require("study.ladder", cfg.usize_list("study.ladder"))?;
            let mut c = ConsistencyConfig::new(model, ladder, reps, seed);
            if let Some(f) = family(cfg)? {
                c.family = f;
            }
            if let Some(r) = cutoff_key(cfg, "study.cutoff")? {
                c.cutoff = r;
            }
            if let Some(p) = pair(cfg)? {
                c.pair = p;
            }
            if let Some(g) = cfg.usize("study.grid_points")? {
                c.grid_points = g;
            }
            StudyConfig::Consistency(c)
        }
        "clt" => {
            let scheme = sampling_kinds(cfg, "sampling", 1)?[0];
            let mut c = CltConfig::new(model, scheme, reps, seed);
            if let Some(r) = cutoff_key(cfg, "study.cutoff")? {
                c.cutoff = r;
            }
            if let Some(p) = pair(cfg)? {
                c.pair = p;
            }
            c.test_function = match cfg.str("study.test_function")?.as_deref() {
                None | Some("bump") => TestFunction::Bump,
                Some("zero") => TestFunction::Zero,
                Some(other) => return Err(bad("study.test_function", &format!("unknown test function {other:?}"))),
            };
            StudyConfig::Clt(c)
        }
        "mse_sweep" => {
            let ladder = cfg.require("study.n_ladder", cfg.usize_list("study.n_ladder"))?;
            let mut c = MseConfig::new(model, ladder, reps, seed);
            if let Some(f) = family(cfg)? {
                c.family = f;
            }
            if let Some(p) = pair(cfg)? {
                c.pair = p;
            }
            if let Some(levels) = cfg.f64_list("study.noise_levels")? {
                c.noise_levels = levels;
            }
            c.cutoffs = cutoff_grid(cfg)?;
            StudyConfig::MseSweep(c)
        }
        "epps" => {
            let intensity = cfg.require("study.intensity", cfg.f64("study.intensity"))?;
            let deltas = cfg.require("study.deltas", cfg.f64_list("study.deltas"))?;
            let mut c = EppsConfig::new(model, intensity, deltas, reps, seed);
            if let Some(r) = cutoff_key(cfg, "study.cutoff")? {
                c.cutoff = r;
            }
            StudyConfig::Epps(c)
        }
        other => return Err(bad("study.kind", &format!("unknown study {other:?}"))),
    };
    study.set_threads(threads);
    Ok(study)
}
