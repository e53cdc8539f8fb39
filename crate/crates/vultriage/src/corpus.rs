//! Devign-style dataset ingestion.
//!
//! Each entry is a JSON object with `func` (string) and `target` (0/1 or a
//! boolean); `project` and `commit_id` are optional. Entries come either as one
//! JSON array or as JSON lines.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;
use thiserror::Error;

pub use vultriage_core::corpus::{
    cross_project_split, stratified_split, FunctionRecord, SplitError, SplitKind, SplitResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DatasetFormat {
    #[default]
    JsonArray,
    Jsonl,
}

impl DatasetFormat {
    /// `.jsonl` / `.ndjson` files are JSON lines, anything else a JSON array.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson") => DatasetFormat::Jsonl,
            _ => DatasetFormat::JsonArray,
        }
    }
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetFormat::JsonArray => "json-array",
            DatasetFormat::Jsonl => "jsonl",
        })
    }
}

impl FromStr for DatasetFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json-array" | "json" => Ok(DatasetFormat::JsonArray),
            "jsonl" => Ok(DatasetFormat::Jsonl),
            other => Err(format!("unknown dataset format `{other}` (expected json-array or jsonl)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed {format} input{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Format { format: DatasetFormat, line: Option<usize>, message: String },
    #[error("entry {index}: missing `{field}`")]
    MissingField { index: usize, field: &'static str },
    #[error("entry {index}: `{field}` has an unsupported value {value}")]
    InvalidField { index: usize, field: &'static str, value: String },
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Vec<FunctionRecord>, LoadError> {
    let bytes =
        std::fs::read(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    parse_dataset(&String::from_utf8_lossy(&bytes), format)
}

/// Parses dataset text. Records keep input order and get ids `0..n`.
pub fn parse_dataset(text: &str, format: DatasetFormat) -> Result<Vec<FunctionRecord>, LoadError> {
    let entries: Vec<Value> = match format {
        DatasetFormat::JsonArray => serde_json::from_str(text).map_err(|e| LoadError::Format {
            format,
            line: Some(e.line()),
            message: e.to_string(),
        })?,
        DatasetFormat::Jsonl => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| LoadError::Format {
                    format,
                    line: Some(i + 1),
                    message: e.to_string(),
                })
            })
            .collect::<Result<_, _>>()?,
    };
    entries.iter().enumerate().map(|(index, entry)| record_from(index, entry)).collect()
}

fn record_from(index: usize, entry: &Value) -> Result<FunctionRecord, LoadError> {
    let obj = entry.as_object().ok_or_else(|| LoadError::InvalidField {
        index,
        field: "entry",
        value: entry.to_string(),
    })?;
    let source = match obj.get("func") {
        Some(Value::String(s)) => s.clone(),
        Some(other) => {
            return Err(LoadError::InvalidField { index, field: "func", value: other.to_string() })
        }
        None => return Err(LoadError::MissingField { index, field: "func" }),
    };
    let label = match obj.get("target") {
        Some(Value::Bool(b)) => u8::from(*b),
        Some(Value::Number(n)) if n.as_u64() == Some(0) || n.as_u64() == Some(1) => n.as_u64().unwrap() as u8,
        Some(other) => {
            return Err(LoadError::InvalidField { index, field: "target", value: other.to_string() })
        }
        None => return Err(LoadError::MissingField { index, field: "target" }),
    };
    let text = |key: &str| match obj.get(key) {
        Some(Value::String(s)) => s.clone(),
        _ => String::new(),
    };
    Ok(FunctionRecord { id: index, project: text("project"), commit: text("commit_id"), label, source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_entry_array() {
        let recs = parse_dataset(
            r#"[{"project":"FFmpeg","target":1,"func":"int f(){}"}]"#,
            DatasetFormat::JsonArray,
        )
        .unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!((recs[0].id, recs[0].label, recs[0].project.as_str()), (0, 1, "FFmpeg"));
        assert_eq!(recs[0].commit, "");
    }

    #[test]
    fn empty_array() {
        assert!(parse_dataset("[]", DatasetFormat::JsonArray).unwrap().is_empty());
    }

    #[test]
    fn jsonl_with_bool_targets() {
        let text =
            "{\"func\":\"a\",\"target\":true,\"commit_id\":\"c1\"}\n\n{\"func\":\"b\",\"target\":false}\n";
        let recs = parse_dataset(text, DatasetFormat::Jsonl).unwrap();
        assert_eq!(recs.iter().map(|r| (r.id, r.label)).collect::<Vec<_>>(), [(0, 1), (1, 0)]);
        assert_eq!(recs[0].commit, "c1");
    }

    #[test]
    fn missing_fields_name_the_entry() {
        let err =
            parse_dataset(r#"[{"func":"a","target":0},{"func":"b"}]"#, DatasetFormat::JsonArray).unwrap_err();
        assert!(matches!(err, LoadError::MissingField { index: 1, field: "target" }));
        let err = parse_dataset(r#"[{"target":0}]"#, DatasetFormat::JsonArray).unwrap_err();
        assert!(matches!(err, LoadError::MissingField { index: 0, field: "func" }));
        let err = parse_dataset(r#"[{"func":"a","target":2}]"#, DatasetFormat::JsonArray).unwrap_err();
        assert!(matches!(err, LoadError::InvalidField { index: 0, field: "target", .. }));
    }

    #[test]
    fn garbage_is_a_format_error() {
        assert!(matches!(
            parse_dataset("{not json", DatasetFormat::JsonArray),
            Err(LoadError::Format { .. })
        ));
        assert!(matches!(
            parse_dataset("{\"func\":\"a\",\"target\":1}\nnope", DatasetFormat::Jsonl),
            Err(LoadError::Format { line: Some(2), .. })
        ));
    }

    #[test]
    fn invalid_utf8_is_replaced() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        let mut bytes = br#"[{"func":"int x = '"#.to_vec();
        bytes.push(0xff);
        bytes.extend_from_slice(br#"';","target":0}]"#);
        std::fs::write(&path, bytes).unwrap();
        let recs = load_dataset(&path, DatasetFormat::JsonArray).unwrap();
        assert!(recs[0].source.contains('\u{FFFD}'));
    }
}
