//! Deterministic report and CSV writers.
//!
//! `report.json` and `data.csv` are byte-identical across reruns of the same
//! (config, seed): floats are printed with 17 significant digits, JSON object
//! keys serialize in sorted order, and nothing time-dependent is included.
//! Wall-clock information lives in `meta.json`, which reruns may change.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::Value;

use crate::error::{CliError, Result};

/// Everything a runner produces: a metrics object for `report.json`, the
/// tabular rows for `data.csv`, and the headline columns a sweep row reports.
pub struct RunOutcome {
    pub metrics: Value,
    pub data_header: Vec<String>,
    pub data_rows: Vec<Vec<String>>,
    /// Fixed-name summary columns; identical names for every run of the same
    /// task so sweep CSV columns line up.
    pub headline: Vec<(String, String)>,
}

/// 17-significant-digit float formatting shared by every CSV column and
/// headline value; round-trips f64 exactly.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_u(x: usize) -> String {
    x.to_string()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::OutputWrite {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn write_report(path: &Path, report: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    write_file(path, &text)
}

/// Writes the run's non-reproducible metadata: timestamps only. Excluded
/// from byte-for-byte comparisons by construction.
pub fn write_meta(path: &Path, started_unix_ms: u128, wall_time_ms: u128) -> Result<()> {
    let meta = serde_json::json!({
        "started_unix_ms": started_unix_ms as u64,
        "wall_time_ms": wall_time_ms as u64,
    });
    write_report(path, &meta)
}

pub fn now_unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Resolved output file paths for one run.
pub struct OutputPaths {
    pub report: PathBuf,
    pub data: PathBuf,
    pub meta: PathBuf,
}

pub fn prepare_out_dir(dir: &Path) -> Result<OutputPaths> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::OutputWrite {
        path: dir.display().to_string(),
        source,
    })?;
    Ok(OutputPaths {
        report: dir.join("report.json"),
        data: dir.join("data.csv"),
        meta: dir.join("meta.json"),
    })
}
