//! Manifest-driven runs: every listed case under every listed variant.

use std::path::{Path, PathBuf};

use qcrelax_conic::SolverRegistry;
use serde::{Deserialize, Serialize};

use crate::pipeline::{run_case, RunOptions};
use crate::report::BatchRow;
use crate::variant::{VariantSpec, PRESETS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    /// Case file, relative to the manifest's directory.
    pub case: String,
    #[serde(default)]
    pub ac_objective: Option<f64>,
    /// Variant preset names; all presets when absent.
    #[serde(default)]
    pub variants: Option<Vec<String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ManifestError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Rows in manifest order, variants in listed order. A failing row records
/// its error and the batch continues.
pub fn run_batch(entries: &[ManifestEntry], base: &Path, options: &RunOptions, solvers: &SolverRegistry) -> Vec<BatchRow> {
    let mut rows = Vec::new();
    for entry in entries {
        let names: Vec<String> = match &entry.variants {
            Some(v) => v.clone(),
            None => PRESETS.iter().map(|(n, _)| n.to_string()).collect(),
        };
        for name in names {
            let failed = |error: String| BatchRow {
                case: entry.case.clone(),
                variant: name.clone(),
                report: None,
                error: Some(error),
            };
            let Some(variant) = VariantSpec::from_name(&name) else {
                rows.push(failed(format!("unknown variant '{name}'")));
                continue;
            };
            let opts = RunOptions {
                variant,
                ac_objective: entry.ac_objective,
                ..options.clone()
            };
            rows.push(match run_case(&base.join(&entry.case), &opts, solvers) {
                Ok(report) => BatchRow {
                    case: entry.case.clone(),
                    ..report.into_row()
                },
                Err(e) => failed(e.to_string()),
            });
        }
    }
    rows
}
