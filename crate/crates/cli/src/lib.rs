//! Runs the QC relaxation on case files and reports bounds, optimality gaps
//! and timings, one case at a time or from a batch manifest.

pub mod batch;
pub mod pipeline;
pub mod report;
pub mod variant;

pub use batch::{read_manifest, run_batch, ManifestEntry, ManifestError};
pub use pipeline::{exit, load_case, run_case, run_network, settings_with_override, RunError, RunOptions, SOLVER_TOL_ENV};
pub use report::{write_csv, write_json, BatchRow, ObbtSummary, RunReport, SolverStats, CSV_COLUMNS};
pub use variant::{VariantSpec, PRESETS};
