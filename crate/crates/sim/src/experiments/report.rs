//! Per-replication records, summaries and pass/fail checks of a study.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Consistency,
    Clt,
    MseSweep,
    Epps,
}

impl StudyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StudyKind::Consistency => "consistency",
            StudyKind::Clt => "clt",
            StudyKind::MseSweep => "mse_sweep",
            StudyKind::Epps => "epps",
        }
    }
}

/// One estimate from one replication. `cell` names the study configuration
/// (ladder point, cutoff, estimator) the estimate belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub replication: usize,
    pub seed: u64,
    pub cell: String,
    pub estimate: f64,
    pub truth: f64,
    pub error: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl Record {
    pub fn new(replication: usize, seed: u64, cell: impl Into<String>, estimate: f64, truth: f64) -> Self {
        Self {
            replication,
            seed,
            cell: cell.into(),
            estimate,
            truth,
            error: estimate - truth,
            extra: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.extra.get(key).copied()
    }
}

/// Statistics of the records in one cell. Moments refer to `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: String,
    pub count: usize,
    pub mean_estimate: f64,
    pub mean_truth: f64,
    pub bias: f64,
    pub variance: f64,
    pub std_error: f64,
    pub mse: f64,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub study: StudyKind,
    pub config: serde_json::Value,
    pub replications: usize,
    #[serde(skip)]
    pub records: Vec<Record>,
    pub summary: Vec<CellSummary>,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default)]
    pub flags: Vec<String>,
}

/// Linear-interpolation quantile of sorted data (type 7).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

fn summarize_cell(cell: &str, records: &[&Record]) -> CellSummary {
    let errors: Vec<f64> = records.iter().map(|r| r.error).collect();
    let estimates: Vec<f64> = records.iter().map(|r| r.estimate).collect();
    let truths: Vec<f64> = records.iter().map(|r| r.truth).collect();
    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    let variance = sample_variance(&errors);
    CellSummary {
        cell: cell.to_string(),
        count: records.len(),
        mean_estimate: mean(&estimates),
        mean_truth: mean(&truths),
        bias: mean(&errors),
        variance,
        std_error: (variance / records.len() as f64).sqrt(),
        mse: errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64,
        q05: quantile(&sorted, 0.05),
        median: quantile(&sorted, 0.5),
        q95: quantile(&sorted, 0.95),
    }
}

/// Summaries per cell, in order of first appearance.
pub fn summarize(records: &[Record]) -> Vec<CellSummary> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&Record>> = BTreeMap::new();
    for r in records {
        let entry = groups.entry(r.cell.as_str()).or_default();
        if entry.is_empty() {
            order.push(r.cell.as_str());
        }
        entry.push(r);
    }
    order
        .into_iter()
        .map(|cell| summarize_cell(cell, &groups[cell]))
        .collect()
}

impl ExperimentReport {
    pub fn new(study: StudyKind, config: serde_json::Value, replications: usize, records: Vec<Record>) -> Self {
        let summary = summarize(&records);
        Self {
            study,
            config,
            replications,
            records,
            summary,
            checks: Vec::new(),
            diagnostics: BTreeMap::new(),
            flags: Vec::new(),
        }
    }

    pub fn cell(&self, name: &str) -> Option<&CellSummary> {
        self.summary.iter().find(|c| c.cell == name)
    }

    pub fn records_in<'a>(&'a self, cell: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| r.cell == cell)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn push_check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    /// Errors unless every cell holds `replications` records and the stored
    /// summary matches a recomputation from the records.
    pub fn verify(&self) -> Result<()> {
        let fresh = summarize(&self.records);
        for cell in &fresh {
            if cell.count != self.replications {
                return Err(SimError::Config(format!(
                    "cell {} holds {} records, expected {}",
                    cell.cell, cell.count, self.replications
                )));
            }
        }
        if fresh.len() != self.summary.len() {
            return Err(SimError::Config(format!(
                "summary lists {} cells, records define {}",
                self.summary.len(),
                fresh.len()
            )));
        }
        for (a, b) in fresh.iter().zip(&self.summary) {
            if !summaries_match(a, b) {
                return Err(SimError::Config(format!(
                    "summary of cell {} does not match its records",
                    b.cell
                )));
            }
        }
        Ok(())
    }

    /// One JSON object per line.
    pub fn write_records<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Summary document (everything except the records).
    pub fn write_summary<W: Write>(&self, out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// Rebuilds a report from its two files and verifies it.
    pub fn read<R1: BufRead, R2: std::io::Read>(records: R1, summary: R2) -> Result<Self> {
        let mut report: ExperimentReport = serde_json::from_reader(summary)
            .map_err(|e| SimError::Config(format!("summary document: {e}")))?;
        for (i, line) in records.lines().enumerate() {
            let line = line.map_err(|e| SimError::Config(format!("records line {}: {e}", i + 1)))?;
            if line.trim().is_empty() {
                continue;
            }
            let r: Record = serde_json::from_str(&line)
                .map_err(|e| SimError::Config(format!("records line {}: {e}", i + 1)))?;
            report.records.push(r);
        }
        report.verify()?;
        Ok(report)
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs()) || (a.is_nan() && b.is_nan())
}

fn summaries_match(a: &CellSummary, b: &CellSummary) -> bool {
    a.cell == b.cell
        && a.count == b.count
        && [
            (a.mean_estimate, b.mean_estimate),
            (a.mean_truth, b.mean_truth),
            (a.bias, b.bias),
            (a.variance, b.variance),
            (a.std_error, b.std_error),
            (a.mse, b.mse),
            (a.q05, b.q05),
            (a.median, b.median),
            (a.q95, b.q95),
        ]
        .iter()
        .all(|&(x, y)| close(x, y))
}
