//! parse → validate → tighten → build → solve → gap.

use std::path::{Path, PathBuf};
use std::time::Instant;

use qcrelax_conic::{SolveStatus, SolverRegistry, SolverSettings};
use qcrelax_core::gap::{gap_percent, GapDenominator};
use qcrelax_core::netdata::{parse_case, validate, NetError, Network};
use qcrelax_core::obbt::{tighten, ObbtConfig, ObbtOutcome};
use qcrelax_core::qcmodel::{build, BoundSet, QcError};

use crate::report::{ObbtSummary, RunReport, SolverStats};
use crate::variant::VariantSpec;

/// Process exit codes. 2 is left to argument-parsing errors.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const INPUT: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
    pub const SOLVER: i32 = 5;
    pub const PARTIAL: i32 = 6;
}

/// Environment variable overriding the solver's feasibility and gap
/// tolerances.
pub const SOLVER_TOL_ENV: &str = "QCRELAX_SOLVER_TOL";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: NetError },
    #[error("invalid network: {0}")]
    Invalid(String),
    #[error("instance is infeasible: {0}")]
    Infeasible(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io { .. } | RunError::Parse { .. } | RunError::Invalid(_) => exit::INPUT,
            RunError::Infeasible(_) => exit::INFEASIBLE,
            RunError::Solver(_) => exit::SOLVER,
        }
    }
}

impl From<QcError> for RunError {
    fn from(e: QcError) -> Self {
        RunError::Invalid(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub variant: VariantSpec,
    pub ac_objective: Option<f64>,
    pub obbt_tol: f64,
    pub max_sweeps: usize,
    pub parallel_obbt: bool,
    /// Add `cost ≤ ac_objective` to every tightening subproblem.
    pub obbt_cutoff: bool,
    pub solver: String,
    pub settings: SolverSettings,
    pub gap_denominator: GapDenominator,
    /// Record wall-clock times; off gives byte-identical reports.
    pub timing: bool,
    /// Recorded in the report; the pipeline itself draws no random numbers.
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        let obbt = ObbtConfig::default();
        RunOptions {
            variant: VariantSpec::default(),
            ac_objective: None,
            obbt_tol: obbt.tol,
            max_sweeps: obbt.max_sweeps,
            parallel_obbt: false,
            obbt_cutoff: false,
            solver: "ipm".into(),
            settings: SolverSettings::default(),
            gap_denominator: GapDenominator::Bound,
            timing: true,
            seed: 0,
        }
    }
}

/// Solver settings with the tolerance override applied, if any.
pub fn settings_with_override(value: Option<&str>) -> Result<SolverSettings, String> {
    let mut s = SolverSettings::default();
    if let Some(v) = value {
        let tol: f64 = v.trim().parse().map_err(|_| format!("{SOLVER_TOL_ENV}: not a number: '{v}'"))?;
        if !(tol > 0.0 && tol < 1.0) {
            return Err(format!("{SOLVER_TOL_ENV}: must lie in (0, 1), got {tol}"));
        }
        s.feas = tol;
        s.gap = tol;
    }
    Ok(s)
}

/// Reads a network from MATPOWER text, or from its JSON form when the file
/// ends in `.json`. An unnamed network takes the file stem.
pub fn load_case(path: &Path) -> Result<Network, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        Network::from_json(&text)
    } else {
        parse_case(&text)
    };
    let mut net = parsed.map_err(|source| RunError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    if net.name.is_empty() {
        net.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    }
    Ok(net)
}

pub fn run_case(path: &Path, options: &RunOptions, solvers: &SolverRegistry) -> Result<RunReport, RunError> {
    run_network(load_case(path)?, options, solvers)
}

pub fn run_network(mut network: Network, options: &RunOptions, solvers: &SolverRegistry) -> Result<RunReport, RunError> {
    let solver = solvers.get(&options.solver).map_err(|e| RunError::Invalid(e.to_string()))?;
    let diagnostics = validate(&mut network);
    let errors: Vec<String> = diagnostics.iter().filter(|d| d.is_error()).map(|d| d.to_string()).collect();
    if !errors.is_empty() {
        return Err(RunError::Invalid(errors.join("; ")));
    }
    let warnings = diagnostics.iter().map(|d| d.to_string()).collect();
    let variant = options.variant;
    let initial = BoundSet::initial(&network)?;

    let (bounds, obbt, bt_time) = if variant.use_bt {
        let config = ObbtConfig {
            tol: options.obbt_tol,
            max_sweeps: options.max_sweeps,
            variant: variant.relaxation(),
            parallel: options.parallel_obbt,
            objective_cutoff: if options.obbt_cutoff { options.ac_objective } else { None },
            solver: options.settings,
            ..ObbtConfig::default()
        };
        let run = tighten(&network, &initial, &config, solver.as_ref())?;
        if let ObbtOutcome::Infeasible { target } = &run.outcome {
            return Err(RunError::Infeasible(format!("bound tightening subproblem {target}")));
        }
        let summary = ObbtSummary::new(&initial, &run);
        let secs = run.trace.wall_time.as_secs_f64();
        (run.bounds, Some(summary), Some(secs))
    } else {
        (initial, None, None)
    };

    let start = Instant::now();
    let model = build(&network, &bounds, variant.relaxation())?;
    let result = solver
        .solve(&model.program, &options.settings)
        .map_err(|e| RunError::Solver(e.to_string()))?;
    let qc_time = start.elapsed().as_secs_f64();
    match result.status {
        SolveStatus::Optimal | SolveStatus::AlmostOptimal => {}
        SolveStatus::Infeasible => {
            let why = result.certificate.clone().unwrap_or_else(|| "relaxation is infeasible".into());
            return Err(RunError::Infeasible(why));
        }
        other => return Err(RunError::Solver(format!("{other} after {} iterations", result.iterations))),
    }

    let qc_bound = result.lower_bound();
    let gap = options
        .ac_objective
        .and_then(|ac| gap_percent(ac, qc_bound, options.gap_denominator).ok());
    let keep = |t: Option<f64>| if options.timing { t } else { None };
    Ok(RunReport {
        case: network.name.clone(),
        variant: variant.name(),
        use_mf: variant.use_mf,
        use_vdiff: variant.use_vdiff,
        use_bt: variant.use_bt,
        ac_objective: options.ac_objective,
        qc_bound,
        gap_percent: gap,
        gap_denominator: options.gap_denominator,
        bt_time: keep(bt_time),
        qc_time: keep(Some(qc_time)),
        obbt,
        solver: SolverStats {
            name: solver.name().to_string(),
            status: result.status.to_string(),
            iterations: result.iterations,
            primal_objective: result.objective,
            dual_objective: result.dual_objective,
            primal_residual: result.primal_residual,
            dual_residual: result.dual_residual,
            relative_gap: result.gap,
        },
        warnings,
        seed: options.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_override_is_validated() {
        assert_eq!(settings_with_override(None).unwrap(), SolverSettings::default());
        let s = settings_with_override(Some(" 1e-6 ")).unwrap();
        assert_eq!((s.feas, s.gap), (1e-6, 1e-6));
        assert!(settings_with_override(Some("tight")).is_err());
        assert!(settings_with_override(Some("0")).is_err());
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            RunError::Invalid(String::new()).exit_code(),
            RunError::Infeasible(String::new()).exit_code(),
            RunError::Solver(String::new()).exit_code(),
        ];
        assert_eq!(codes, [exit::INPUT, exit::INFEASIBLE, exit::SOLVER]);
    }
}
