//! CSV and JSON writers. Reals are written with 17 significant digits so
//! every value parses back to the same double.

use std::io::Write;

use fouriervol_core::{SpotCurve, TickSeries};
use fouriervol_sim::FinePath;
use serde_json::json;

use crate::error::{CliError, Result};

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io("<output>", io),
        other => CliError::Config(format!("{other:?}")),
    }
}

/// One integrated estimate for the pair `(asset_i, asset_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEstimate {
    pub asset_i: String,
    pub asset_j: String,
    pub value: f64,
}

pub fn write_integrated_csv<W: Write>(out: W, n_freq: usize, rows: &[PairEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["asset_i", "asset_j", "N", "estimate"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.asset_i.as_str(), r.asset_j.as_str(), &n_freq.to_string(), &real(r.value)])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("<output>", e))
}

pub fn integrated_json(window: (f64, f64), n_freq: usize, auto: bool, rows: &[PairEstimate]) -> serde_json::Value {
    json!({
        "window": [window.0, window.1],
        "N": n_freq,
        "cutoff": if auto { "auto" } else { "fixed" },
        "estimates": rows.iter().map(|r| json!({
            "asset_i": r.asset_i,
            "asset_j": r.asset_j,
            "estimate": r.value,
        })).collect::<Vec<_>>(),
    })
}

/// Spot curve of one pair, with the raw-clock image of each grid time.
#[derive(Debug, Clone)]
pub struct PairCurve {
    pub asset_i: String,
    pub asset_j: String,
    pub curve: SpotCurve,
    pub raw_times: Vec<f64>,
}

pub fn write_spot_csv<W: Write>(out: W, curve: &PairCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_rescaled", "t_raw", "value", "variant", "N"]).map_err(csv_err)?;
    let variant = curve.curve.variant.as_str();
    let n = curve.curve.n_freq.to_string();
    for ((t, raw), v) in curve.curve.grid.iter().zip(&curve.raw_times).zip(&curve.curve.values) {
        w.write_record([real(*t), real(*raw), real(*v), variant.to_string(), n.clone()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("<output>", e))
}

pub fn spot_json(curves: &[PairCurve]) -> serde_json::Value {
    json!(curves
        .iter()
        .map(|c| json!({
            "asset_i": c.asset_i,
            "asset_j": c.asset_j,
            "variant": c.curve.variant.as_str(),
            "N": c.curve.n_freq,
            "t_rescaled": c.curve.grid,
            "t_raw": c.raw_times,
            "value": c.curve.values,
        }))
        .collect::<Vec<_>>())
}

/// Ticks of all assets merged by time; ties keep asset order.
pub fn write_ticks_csv<W: Write>(out: W, series: &[TickSeries]) -> Result<()> {
    let mut rows: Vec<(f64, usize, f64)> = series
        .iter()
        .enumerate()
        .flat_map(|(a, s)| s.times.iter().zip(&s.log_prices).map(move |(&t, &p)| (t, a, p)))
        .collect();
    rows.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(crate::ingest::HEADER).map_err(csv_err)?;
    for (t, a, p) in rows {
        w.write_record([series[a].asset_id.as_str(), &real(t), &real(p)]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("<output>", e))
}

/// `t,sigma11,sigma12,sigma22` on the fine grid, then an `integrated` row.
/// Columns that do not exist for a single asset are left empty.
pub fn write_truth_csv<W: Write>(out: W, path: &FinePath) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "sigma11", "sigma12", "sigma22"]).map_err(csv_err)?;
    let cell = |i: usize, j: usize, m: Option<usize>| -> String {
        if i.max(j) >= path.n_assets() {
            return String::new();
        }
        match m {
            Some(m) => real(path.spot(i, j)[m]),
            None => real(path.integrated(i, j)),
        }
    };
    for m in 0..=path.n_steps {
        w.write_record([real(path.time(m)), cell(0, 0, Some(m)), cell(0, 1, Some(m)), cell(1, 1, Some(m))])
            .map_err(csv_err)?;
    }
    w.write_record(["integrated".to_string(), cell(0, 0, None), cell(0, 1, None), cell(1, 1, None)])
        .map_err(csv_err)?;
    w.flush().map_err(|e| CliError::io("<output>", e))
}
