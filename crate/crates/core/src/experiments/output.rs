//! Result files.
//!
//! CSV files start with `#` comment lines carrying the sweep spec and the
//! provenance block as JSON, followed by a header and one row per
//! `(coordinate, mode)` with the columns of [`CSV_COLUMNS`]. Missing values
//! are empty fields. JSON files hold the whole [`ExperimentResult`].

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentError, ExperimentResult, ResultRow};
use crate::eval::Summary;

pub const CSV_COLUMNS: [&str; 10] = [
    "coordinate",
    "mode",
    "auc_intra_mean",
    "auc_intra_std",
    "auc_inter_mean",
    "auc_inter_std",
    "delta",
    "runs",
    "seed",
    "runtime_s",
];

const MAGIC: &str = "# multisage results v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// From a file extension, `csv` or `json`.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn emit_results(
    result: &ExperimentResult,
    format: OutputFormat,
    path: &Path,
) -> Result<(), ExperimentError> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, result)?;
            writeln!(w)?;
        }
        OutputFormat::Csv => {
            writeln!(w, "{MAGIC}")?;
            writeln!(w, "# spec {}", serde_json::to_string(&result.spec)?)?;
            writeln!(
                w,
                "# provenance {}",
                serde_json::to_string(&result.provenance)?
            )?;
            let mut csv = csv::Writer::from_writer(&mut w);
            csv.write_record(CSV_COLUMNS)?;
            for r in &result.rows {
                csv.write_record([
                    r.coordinate.clone(),
                    r.mode.to_string(),
                    opt(r.auc_intra.map(|s| s.mean)),
                    opt(r.auc_intra.map(|s| s.std)),
                    opt(r.auc_inter.map(|s| s.mean)),
                    opt(r.auc_inter.map(|s| s.std)),
                    opt(r.delta),
                    r.runs.to_string(),
                    r.seed.to_string(),
                    r.runtime_s.to_string(),
                ])?;
            }
            csv.flush()?;
        }
    }
    w.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    i: usize,
) -> Result<Option<T>, ExperimentError> {
    let s = rec.get(i).unwrap_or("");
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| ExperimentError::Format(format!("bad {} value {s:?}", CSV_COLUMNS[i])))
}

fn required<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T, ExperimentError> {
    field(rec, i)?.ok_or_else(|| ExperimentError::Format(format!("missing {}", CSV_COLUMNS[i])))
}

fn summary(
    mean: Option<f64>,
    std: Option<f64>,
    runs: usize,
) -> Result<Option<Summary>, ExperimentError> {
    match (mean, std) {
        (Some(mean), Some(std)) => Ok(Some(Summary { mean, std, runs })),
        (None, None) => Ok(None),
        _ => Err(ExperimentError::Format("mean without std".into())),
    }
}

/// Reads a file written by [`emit_results`].
pub fn read_results(
    path: &Path,
    format: OutputFormat,
) -> Result<ExperimentResult, ExperimentError> {
    match format {
        OutputFormat::Json => Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?),
        OutputFormat::Csv => {
            let (mut spec, mut provenance) = (None, None);
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                if let Some(json) = line.strip_prefix("# spec ") {
                    spec = Some(serde_json::from_str(json)?);
                } else if let Some(json) = line.strip_prefix("# provenance ") {
                    provenance = Some(serde_json::from_str(json)?);
                } else if !line.starts_with('#') {
                    break;
                }
            }
            let mut reader = csv::ReaderBuilder::new()
                .comment(Some(b'#'))
                .from_path(path)?;
            if reader.headers()?.iter().ne(CSV_COLUMNS) {
                return Err(ExperimentError::Format("unexpected column layout".into()));
            }
            let mut rows = Vec::new();
            for rec in reader.records() {
                let rec = rec?;
                let mode: String = required(&rec, 1)?;
                let runs: usize = required(&rec, 7)?;
                rows.push(ResultRow {
                    coordinate: required(&rec, 0)?,
                    mode: mode.parse().map_err(ExperimentError::Format)?,
                    auc_intra: summary(field(&rec, 2)?, field(&rec, 3)?, runs)?,
                    auc_inter: summary(field(&rec, 4)?, field(&rec, 5)?, runs)?,
                    delta: field(&rec, 6)?,
                    runs,
                    seed: required(&rec, 8)?,
                    runtime_s: required(&rec, 9)?,
                });
            }
            Ok(ExperimentResult {
                spec: spec.ok_or_else(|| ExperimentError::Format("no spec line".into()))?,
                provenance: provenance
                    .ok_or_else(|| ExperimentError::Format("no provenance line".into()))?,
                rows,
            })
        }
    }
}
