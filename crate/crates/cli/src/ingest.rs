//! Tick CSV input: `asset_id,timestamp,log_price`.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use fouriervol_core::TickSeries;

use crate::error::{CliError, Result};

pub const HEADER: [&str; 3] = ["asset_id", "timestamp", "log_price"];

pub fn ingest_csv(path: impl AsRef<Path>) -> Result<Vec<TickSeries>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    ingest_reader(file)
}

/// One series per distinct `asset_id`, in order of first appearance, each
/// stably sorted by timestamp.
pub fn ingest_reader<R: Read>(reader: R) -> Result<Vec<TickSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(CliError::EmptySeries("input file is empty".into())),
        Some(r) => r.map_err(|e| csv_error(e, 1))?,
    };
    let names: Vec<&str> = header.iter().collect();
    if names != HEADER {
        return Err(CliError::Schema {
            line: 1,
            message: format!("expected header {}, found {}", HEADER.join(","), names.join(",")),
        });
    }

    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(f64, f64)>> = HashMap::new();
    for record in records {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != HEADER.len() {
            return Err(CliError::Schema {
                line,
                message: format!("expected {} fields, found {}", HEADER.len(), record.len()),
            });
        }
        let asset = record[0].to_string();
        if asset.is_empty() {
            return Err(CliError::Parse {
                line,
                message: "empty asset_id".into(),
            });
        }
        let time = number(&record[1], "timestamp", line)?;
        let price = number(&record[2], "log_price", line)?;
        if !rows.contains_key(&asset) {
            order.push(asset.clone());
        }
        rows.entry(asset).or_default().push((time, price));
    }
    if order.is_empty() {
        return Err(CliError::EmptySeries("input file holds no observations".into()));
    }

    Ok(order
        .into_iter()
        .map(|asset| {
            let mut obs = rows.remove(&asset).expect("grouped asset");
            obs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (times, prices) = obs.into_iter().unzip();
            TickSeries {
                asset_id: asset,
                times,
                log_prices: prices,
            }
        })
        .collect())
}

fn number(field: &str, column: &str, line: u64) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Parse {
            line,
            message: format!("{column} {field:?} is not a finite number"),
        }),
    }
}

fn csv_error(e: csv::Error, fallback_line: u64) -> CliError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    CliError::Parse {
        line,
        message: e.to_string(),
    }
}
