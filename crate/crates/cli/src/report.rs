//! Run reports and their JSON/CSV renderings.

use std::io::Write;

use qcrelax_core::envelopes::Interval;
use qcrelax_core::gap::GapDenominator;
use qcrelax_core::obbt::{ObbtOutcome, ObbtRun};
use qcrelax_core::qcmodel::BoundSet;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObbtSummary {
    pub sweeps: usize,
    pub subproblems: usize,
    pub outcome: String,
    /// Reduction of the summed box widths, in percent.
    pub v_shrink_percent: f64,
    pub theta_shrink_percent: f64,
    pub vdiff_shrink_percent: f64,
}

fn shrink_percent(before: &[Interval], after: &[Interval]) -> f64 {
    let total = |xs: &[Interval]| xs.iter().map(|x| x.width()).sum::<f64>();
    let w0 = total(before);
    if w0 > 0.0 {
        100.0 * (1.0 - total(after) / w0)
    } else {
        0.0
    }
}

impl ObbtSummary {
    pub fn new(initial: &BoundSet, run: &ObbtRun) -> Self {
        let outcome = match &run.outcome {
            ObbtOutcome::Converged => "converged".to_string(),
            ObbtOutcome::SweepLimit => "sweep-limit".to_string(),
            ObbtOutcome::Infeasible { target } => format!("infeasible at {target}"),
        };
        ObbtSummary {
            sweeps: run.trace.sweeps.len(),
            subproblems: run.trace.subproblems,
            outcome,
            v_shrink_percent: shrink_percent(&initial.v, &run.bounds.v),
            theta_shrink_percent: shrink_percent(&initial.theta, &run.bounds.theta),
            vdiff_shrink_percent: shrink_percent(&initial.vdiff, &run.bounds.vdiff),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub name: String,
    pub status: String,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub relative_gap: f64,
}

/// Outcome of one case under one variant. `gap_percent` is present iff
/// `ac_objective` is present and the gap denominator is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub case: String,
    pub variant: String,
    pub use_mf: bool,
    pub use_vdiff: bool,
    pub use_bt: bool,
    pub ac_objective: Option<f64>,
    /// Valid lower bound on the AC optimum in $/hr.
    pub qc_bound: f64,
    pub gap_percent: Option<f64>,
    pub gap_denominator: GapDenominator,
    /// Seconds; absent without bound tightening or when timing is off.
    pub bt_time: Option<f64>,
    pub qc_time: Option<f64>,
    pub obbt: Option<ObbtSummary>,
    pub solver: SolverStats,
    pub warnings: Vec<String>,
    pub seed: u64,
}

/// One manifest row: a report or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub case: String,
    pub variant: String,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

pub const CSV_COLUMNS: [&str; 14] = [
    "case",
    "variant",
    "use_mf",
    "use_vdiff",
    "use_bt",
    "status",
    "ac_objective",
    "qc_bound",
    "gap_percent",
    "obbt_sweeps",
    "solver_iterations",
    "bt_time",
    "qc_time",
    "error",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BatchRow {
    fn csv_record(&self) -> Vec<String> {
        match &self.report {
            Some(r) => vec![
                self.case.clone(),
                self.variant.clone(),
                r.use_mf.to_string(),
                r.use_vdiff.to_string(),
                r.use_bt.to_string(),
                r.solver.status.clone(),
                opt(r.ac_objective),
                r.qc_bound.to_string(),
                opt(r.gap_percent),
                opt(r.obbt.as_ref().map(|o| o.sweeps)),
                r.solver.iterations.to_string(),
                opt(r.bt_time),
                opt(r.qc_time),
                String::new(),
            ],
            None => {
                let mut rec = vec![String::new(); CSV_COLUMNS.len()];
                rec[0] = self.case.clone();
                rec[1] = self.variant.clone();
                rec[5] = "error".into();
                rec[13] = self.error.clone().unwrap_or_default();
                rec
            }
        }
    }
}

pub fn write_csv<W: Write>(rows: &[BatchRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.write_record(row.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)
}

impl RunReport {
    pub fn into_row(self) -> BatchRow {
        BatchRow {
            case: self.case.clone(),
            variant: self.variant.clone(),
            report: Some(self),
            error: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrink_of_unchanged_and_halved_boxes() {
        let a = [Interval::new(0.9, 1.1), Interval::new(-0.1, 0.1)];
        assert_eq!(shrink_percent(&a, &a), 0.0);
        let b = [Interval::new(0.95, 1.05), Interval::new(-0.05, 0.05)];
        assert!((shrink_percent(&a, &b) - 50.0).abs() < 1e-9);
        assert_eq!(shrink_percent(&[], &[]), 0.0);
    }

    #[test]
    fn error_rows_keep_the_column_count() {
        let row = BatchRow {
            case: "missing.m".into(),
            variant: "all".into(),
            report: None,
            error: Some("cannot read".into()),
        };
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0].split(',').count(), CSV_COLUMNS.len());
        assert_eq!(lines[1], "missing.m,all,,,,error,,,,,,,,cannot read");
    }
}
