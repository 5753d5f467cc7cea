//! Command-line front end: tick CSV ingestion, integrated and spot
//! estimates, simulation of tick files with their true volatility paths, and
//! Monte Carlo studies.
//!
//! Exit codes: 0 on success, 1 on invalid input or arguments, 2 on I/O
//! failure.

pub mod config;
pub mod error;
pub mod ingest;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fouriervol_core::{
    convolution_coeffs, default_grid, fejer_spot_reconstruct, integrated_covolatility_from_coeffs,
    integrated_volatility, positive_spot_reconstruct, rescale_time, return_fourier_coeffs, select_cutoff,
    PositiveNormalization, RescaledSeries, TickSeries,
};
use fouriervol_sim::experiments::{derive_seed, run_study};
use fouriervol_sim::{add_noise, sample_path, simulate_path, ExperimentReport};

use crate::config::ConfigFile;
pub use crate::error::{CliError, Result};
pub use crate::ingest::{ingest_csv, ingest_reader};
use crate::output::{PairCurve, PairEstimate};

#[derive(Debug, Parser)]
#[command(name = "fouriervol", version, about = "Fourier estimators of integrated and spot (co)volatility")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrated (co)volatility for every asset pair, diagonals included.
    EstimateIntegrated(EstimateArgs),
    /// Spot (co)volatility curves for every asset pair.
    EstimateSpot(SpotArgs),
    /// Simulated tick CSV plus the true covariance path.
    Simulate(RunArgs),
    /// Monte Carlo study; writes a summary document and a records file.
    Study(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    Canonical,
    Positive,
    /// Same estimator as `positive`.
    FejerStabilized,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Tick CSV with header asset_id,timestamp,log_price.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Observation window `start,end` on the raw clock.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Cutoff N, or `auto` for round(mesh^(-2/3)).
    #[arg(long)]
    cutoff: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct SpotArgs {
    #[command(flatten)]
    common: EstimateArgs,
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    /// Number of evenly spaced evaluation points in [0, 2π).
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code. Errors are reported on stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::EstimateIntegrated(args) => estimate_integrated(&args),
        Command::EstimateSpot(args) => estimate_spot(&args),
        Command::Simulate(args) => simulate(&args),
        Command::Study(args) => study(&args),
    }
}

pub fn parse_window(text: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let parsed: Option<Vec<f64>> = parts.iter().map(|p| p.parse::<f64>().ok()).collect();
    match parsed.as_deref() {
        Some(&[a, b]) if a.is_finite() && b.is_finite() && a < b => Ok((a, b)),
        _ => Err(CliError::Usage(format!("--window expects start,end with start < end, got {text:?}"))),
    }
}

/// Series, window and cutoff rule shared by the estimate commands.
struct EstimateInputs {
    series: Vec<TickSeries>,
    rescaled: Vec<RescaledSeries>,
    window: (f64, f64),
    cutoff: Option<usize>,
}

impl EstimateInputs {
    fn n_freq(&self) -> Result<usize> {
        match self.cutoff {
            Some(n) => Ok(n),
            None => {
                let mesh = self.rescaled.iter().map(|s| s.mesh()).fold(0.0, f64::max);
                let n = select_cutoff(mesh)?;
                eprintln!("auto-selected N = {n} (mesh {mesh:.6e} on the rescaled clock)");
                Ok(n)
            }
        }
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        fouriervol_sim::simulate::pairs(self.series.len())
    }
}

fn load_inputs(args: &EstimateArgs, cfg: &ConfigFile) -> Result<EstimateInputs> {
    let input = match (&args.input, cfg.str("input")?) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => return Err(CliError::Usage("--input is required".into())),
    };
    let window_text = match (&args.window, cfg.raw_window()?) {
        (Some(w), _) => Some(parse_window(w)?),
        (None, w) => w,
    };
    let cutoff_text = args.cutoff.clone().or(cfg.str("estimate.cutoff")?);
    let cutoff = match cutoff_text.as_deref().map(str::trim) {
        None | Some("auto") => None,
        Some(n) => Some(
            n.parse::<usize>()
                .map_err(|_| CliError::Usage(format!("--cutoff expects an integer or auto, got {n:?}")))?,
        ),
    };

    let series = ingest_csv(&input)?;
    let window = match window_text {
        Some(w) => w,
        None => {
            let spans: Vec<(f64, f64)> = series.iter().filter_map(|s| s.span()).collect();
            let start = spans.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
            let end = spans.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
            (start, end)
        }
    };
    let rescaled = series
        .iter()
        .map(|s| rescale_time(s, window))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(EstimateInputs {
        series,
        rescaled,
        window,
        cutoff,
    })
}

impl ConfigFile {
    fn raw_window(&self) -> Result<Option<(f64, f64)>> {
        match self.f64_list("estimate.window")? {
            None => Ok(None),
            Some(v) if v.len() == 2 && v[0] < v[1] => Ok(Some((v[0], v[1]))),
            Some(_) => Err(CliError::Config("estimate.window: expected [start, end] with start < end".into())),
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

/// Runs `f` against `path`, or stdout when no path is given.
fn emit(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w)?;
            w.flush().map_err(|e| CliError::io(p, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)?;
            lock.flush().map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn write_json(w: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::io("<output>", e.into()))?;
    writeln!(w).map_err(|e| CliError::io("<output>", e))
}

fn estimate_integrated(args: &EstimateArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let inputs = load_inputs(args, &cfg)?;
    cfg.finish()?;
    let n_freq = inputs.n_freq()?;
    let coeffs: Vec<_> = inputs.rescaled.iter().map(|s| return_fourier_coeffs(s, n_freq)).collect();
    let rows = inputs
        .pairs()
        .into_iter()
        .map(|(i, j)| {
            let value = if i == j {
                integrated_volatility(&coeffs[i], n_freq)?
            } else {
                integrated_covolatility_from_coeffs(&coeffs[i], &coeffs[j], n_freq)?
            };
            Ok(PairEstimate {
                asset_i: inputs.series[i].asset_id.clone(),
                asset_j: inputs.series[j].asset_id.clone(),
                value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    emit(args.out.as_deref(), |w| match args.format {
        Format::Csv => output::write_integrated_csv(w, n_freq, &rows),
        Format::Json => write_json(w, &output::integrated_json(inputs.window, n_freq, inputs.cutoff.is_none(), &rows)),
    })
}

/// Curves for every pair. The positive variant exists for a single asset
/// only, so off-diagonal pairs always use the canonical estimator.
fn spot_curves(inputs: &EstimateInputs, n_freq: usize, positive: bool, points: usize) -> Result<Vec<PairCurve>> {
    if n_freq == 0 {
        return Err(fouriervol_core::EstimatorError::InvalidCutoff("spot estimates need N >= 1".into()).into());
    }
    let grid = default_grid(points);
    let coeffs: Vec<_> = inputs.rescaled.iter().map(|s| return_fourier_coeffs(s, 2 * n_freq)).collect();
    inputs
        .pairs()
        .into_iter()
        .map(|(i, j)| {
            let curve = if positive && i == j {
                positive_spot_reconstruct(&coeffs[i], n_freq, &grid, PositiveNormalization::Consistent)?
            } else {
                let alpha = convolution_coeffs(&coeffs[i], &coeffs[j], n_freq, n_freq)?;
                fejer_spot_reconstruct(&alpha, n_freq, &grid)?
            };
            let raw_times = grid.iter().map(|&t| inputs.rescaled[i].to_raw_time(t)).collect();
            Ok(PairCurve {
                asset_i: inputs.series[i].asset_id.clone(),
                asset_j: inputs.series[j].asset_id.clone(),
                curve,
                raw_times,
            })
        })
        .collect()
}

/// `out` itself for one curve; `stem_<i>_<j>.ext` next to it otherwise.
fn pair_path(out: &Path, curve: &PairCurve, single: bool) -> PathBuf {
    if single {
        return out.to_path_buf();
    }
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    out.with_file_name(format!("{stem}_{}_{}{ext}", curve.asset_i, curve.asset_j))
}

fn estimate_spot(args: &SpotArgs) -> Result<()> {
    let cfg = load_config(args.common.config.as_deref())?;
    let inputs = load_inputs(&args.common, &cfg)?;
    let variant = match (args.variant, cfg.str("estimate.variant")?.as_deref()) {
        (Some(v), _) => v,
        (None, None | Some("canonical")) => Variant::Canonical,
        (None, Some("positive")) => Variant::Positive,
        (None, Some("fejer-stabilized")) => Variant::FejerStabilized,
        (None, Some(other)) => return Err(CliError::Config(format!("estimate.variant: unknown variant {other:?}"))),
    };
    let points = match args.grid {
        Some(g) => g,
        None => cfg.usize("estimate.grid")?.unwrap_or(fouriervol_core::spot::DEFAULT_GRID_POINTS),
    };
    cfg.finish()?;
    if points == 0 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    let n_freq = inputs.n_freq()?;
    let curves = spot_curves(&inputs, n_freq, variant != Variant::Canonical, points)?;

    match (args.common.format, args.common.out.as_deref()) {
        (Format::Json, out) => emit(out, |w| write_json(w, &output::spot_json(&curves))),
        (Format::Csv, Some(out)) => {
            for c in &curves {
                emit(Some(&pair_path(out, c, curves.len() == 1)), |w| output::write_spot_csv(w, c))?;
            }
            Ok(())
        }
        (Format::Csv, None) => emit(None, |w| {
            for (k, c) in curves.iter().enumerate() {
                if curves.len() > 1 {
                    if k > 0 {
                        writeln!(w).map_err(|e| CliError::io("<stdout>", e))?;
                    }
                    writeln!(w, "# {},{}", c.asset_i, c.asset_j).map_err(|e| CliError::io("<stdout>", e))?;
                }
                output::write_spot_csv(&mut *w, c)?;
            }
            Ok(())
        }),
    }
}

/// `path` with its extension replaced by `suffix`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn seed_of(args: &RunArgs, cfg: &ConfigFile) -> Result<u64> {
    let from_file = cfg.u64("seed")?;
    Ok(args.seed.or(from_file).unwrap_or(0))
}

const NOISE_SEED_TAG: u64 = 20;

fn simulate(args: &RunArgs) -> Result<()> {
    let cfg = ConfigFile::load(&args.config)?;
    let seed = seed_of(args, &cfg)?;
    let model = config::model_spec(&cfg)?;
    let scheme = config::sampling_scheme(&cfg, model.n_assets())?;
    let noise = config::noise_spec(&cfg)?;
    let step = config::simulation_step(&cfg, &scheme)?;
    let ticks_path = match (&args.out, cfg.str("output.ticks")?) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => return Err(CliError::Usage("simulate needs --out or output.ticks".into())),
    };
    let truth_path = match cfg.str("output.truth")? {
        Some(p) if args.out.is_none() => PathBuf::from(p),
        _ => sibling(&ticks_path, ".truth.csv"),
    };
    cfg.finish()?;

    let path = simulate_path(&model, step, seed)?;
    let series = sample_path(&path, &scheme, seed)?
        .iter()
        .enumerate()
        .map(|(a, s)| add_noise(s, &noise, derive_seed(seed, &[NOISE_SEED_TAG, a as u64])))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    emit(Some(&ticks_path), |w| output::write_ticks_csv(w, &series))?;
    emit(Some(&truth_path), |w| output::write_truth_csv(w, &path))?;
    eprintln!(
        "wrote {} ticks to {} and the true covariance path to {}",
        series.iter().map(|s| s.len()).sum::<usize>(),
        ticks_path.display(),
        truth_path.display()
    );
    Ok(())
}

fn study(args: &RunArgs) -> Result<()> {
    let cfg = ConfigFile::load(&args.config)?;
    let seed = seed_of(args, &cfg)?;
    let study = config::study_config(&cfg, seed)?;
    let summary_path = match (&args.out, cfg.str("output.summary")?) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => return Err(CliError::Usage("study needs --out or output.summary".into())),
    };
    cfg.finish()?;
    let records_path = sibling(&summary_path, ".records.jsonl");

    let report: ExperimentReport = run_study(&study)?;
    emit(Some(&records_path), |w| {
        report.write_records(&mut *w).map_err(|e| CliError::io(&records_path, e))
    })?;
    emit(Some(&summary_path), |w| {
        report.write_summary(&mut *w).map_err(|e| CliError::io(&summary_path, e))?;
        writeln!(w).map_err(|e| CliError::io(&summary_path, e))
    })?;
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for f in &report.flags {
        eprintln!("flag: {f}");
    }
    Ok(())
}
