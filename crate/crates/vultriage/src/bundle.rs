//! Saved detectors for the `train` / `score` workflow.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use vultriage_core::Detector;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

/// A fitted detector with the settings it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub min_df: usize,
    pub n_train: usize,
    pub detector: Detector,
}

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed model bundle: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model bundle version {found} is not supported (expected {BUNDLE_FORMAT_VERSION})")]
    Version { found: u32 },
}

impl ModelBundle {
    pub fn new(detector: Detector, min_df: usize, n_train: usize) -> Self {
        ModelBundle { format_version: BUNDLE_FORMAT_VERSION, min_df, n_train, detector }
    }

    pub fn save(&self, path: &Path) -> Result<(), BundleError> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text)
            .map_err(|source| BundleError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, BundleError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| BundleError::Io { path: path.display().to_string(), source })?;
        let bundle: ModelBundle = serde_json::from_str(&text)?;
        if bundle.format_version != BUNDLE_FORMAT_VERSION {
            return Err(BundleError::Version { found: bundle.format_version });
        }
        Ok(bundle)
    }
}
