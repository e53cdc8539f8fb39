//! Report rows and their CSV / JSON serialization.

use std::fmt::Write as _;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CSV_HEADER: &str = "setting,variant,renamed,pr_auc,roc_auc,f1,precision,recall,recall_at_k,feat_time_s,train_time_s,infer_time_s,n_train,n_test,n_features";

/// One (setting, variant, renaming) result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub setting: String,
    pub variant: String,
    pub renamed: bool,
    pub pr_auc: f64,
    pub roc_auc: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub recall_at_k: f64,
    pub feat_time_s: f64,
    pub train_time_s: f64,
    pub infer_time_s: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
}

impl ReportRow {
    /// Copy with the three wall-clock columns zeroed.
    pub fn without_timings(&self) -> Self {
        ReportRow { feat_time_s: 0.0, train_time_s: 0.0, infer_time_s: 0.0, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl ReportFormat {
    /// `.json` means JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("malformed report: {0}")]
    Parse(#[from] csv::Error),
    #[error("unexpected report header `{0}`")]
    Header(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Header plus one line per row; reals carry 6 decimals.
pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{}",
            r.setting,
            r.variant,
            r.renamed,
            r.pr_auc,
            r.roc_auc,
            r.f1,
            r.precision,
            r.recall,
            r.recall_at_k,
            r.feat_time_s,
            r.train_time_s,
            r.infer_time_s,
            r.n_train,
            r.n_test,
            r.n_features
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<ReportRow>, ReportError> {
    let header = text.lines().next().unwrap_or_default();
    if header != CSV_HEADER {
        return Err(ReportError::Header(header.to_string()));
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader.deserialize().map(|r| r.map_err(ReportError::from)).collect()
}

pub fn to_json(rows: &[ReportRow]) -> Result<String, ReportError> {
    let mut s = serde_json::to_string_pretty(rows)?;
    s.push('\n');
    Ok(s)
}

pub fn emit_report(rows: &[ReportRow], path: &Path, format: ReportFormat) -> Result<(), ReportError> {
    let body = match format {
        ReportFormat::Csv => to_csv(rows),
        ReportFormat::Json => to_json(rows)?,
    };
    std::fs::write(path, body).map_err(|source| ReportError::Io { path: path.display().to_string(), source })
}
