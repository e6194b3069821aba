//! Optimization-based bound tightening: minimize and maximize each voltage
//! magnitude (through w_ii), angle difference and magnitude difference over
//! the relaxation, shrink the boxes, and repeat until nothing moves.

mod policy;

use std::time::{Duration, Instant};

use qcrelax_conic::{ConicSolver, RowSense, SolveStatus, SolverSettings};
use serde::{Deserialize, Serialize};

use crate::envelopes::Interval;
use crate::netdata::Network;
use crate::qcmodel::{build, links, BoundSet, Link, QcError, QcObjective, QcVariant, Target, VarTag};

pub use policy::{Parallel, Sequential, SweepPolicy, SweepPolicyRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObbtConfig {
    /// Smallest single-bound improvement that keeps the sweeps going.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Relaxation used by every subproblem; its objective is ignored.
    pub variant: QcVariant,
    /// Solve a sweep against its starting bounds and merge at the end.
    pub parallel: bool,
    /// Optional cut `cost ≤ cutoff` added to every subproblem.
    pub objective_cutoff: Option<f64>,
    /// Outward slack added to every solved bound to absorb solver error,
    /// scaled by `1 + |bound|`.
    pub safety_margin: f64,
    pub solver: SolverSettings,
}

impl Default for ObbtConfig {
    fn default() -> Self {
        ObbtConfig {
            tol: 1e-4,
            max_sweeps: 10,
            variant: QcVariant::default(),
            parallel: false,
            objective_cutoff: None,
            safety_margin: 1e-6,
            solver: SolverSettings::default(),
        }
    }
}

impl ObbtConfig {
    pub fn policy_name(&self) -> &'static str {
        if self.parallel {
            "parallel"
        } else {
            "sequential"
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

/// A quantity whose box is tightened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundTarget {
    /// Voltage magnitude of a bus, tightened through w_ii.
    Voltage(usize),
    AngleDiff(usize),
    VoltageDiff(usize),
}

impl BoundTarget {
    fn model_target(self) -> Target {
        match self {
            BoundTarget::Voltage(i) => Target::Var(VarTag::W(i)),
            BoundTarget::AngleDiff(k) => Target::AngleDiff(k),
            BoundTarget::VoltageDiff(k) => Target::Var(VarTag::VDiff(k)),
        }
    }

    pub fn interval(self, b: &BoundSet) -> Interval {
        match self {
            BoundTarget::Voltage(i) => b.v[i],
            BoundTarget::AngleDiff(k) => b.theta[k],
            BoundTarget::VoltageDiff(k) => b.vdiff[k],
        }
    }

    fn interval_mut(self, b: &mut BoundSet) -> &mut Interval {
        match self {
            BoundTarget::Voltage(i) => &mut b.v[i],
            BoundTarget::AngleDiff(k) => &mut b.theta[k],
            BoundTarget::VoltageDiff(k) => &mut b.vdiff[k],
        }
    }
}

impl std::fmt::Display for BoundTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundTarget::Voltage(i) => write!(f, "v[{i}]"),
            BoundTarget::AngleDiff(k) => write!(f, "theta_diff[{k}]"),
            BoundTarget::VoltageDiff(k) => write!(f, "vdiff[{k}]"),
        }
    }
}

/// Sweep order: all magnitudes, then angle differences, then magnitude
/// differences when the variant carries them; each by ascending index.
pub fn sweep_targets(network: &Network, links: &[Link], variant: &QcVariant) -> Vec<(BoundTarget, Sense)> {
    let mut out = Vec::new();
    let both = |t: BoundTarget, out: &mut Vec<_>| {
        out.push((t, Sense::Min));
        out.push((t, Sense::Max));
    };
    (0..network.buses.len()).for_each(|i| both(BoundTarget::Voltage(i), &mut out));
    (0..links.len()).for_each(|k| both(BoundTarget::AngleDiff(k), &mut out));
    if variant.use_vdiff {
        (0..links.len()).for_each(|k| both(BoundTarget::VoltageDiff(k), &mut out));
    }
    out
}

/// Result of one min/max subproblem, already in the natural variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    /// Valid bound on the target in the solved direction, with the status
    /// of the solve that produced it.
    Bound(f64, SolveStatus),
    Infeasible,
    /// The solver did not certify optimality; the bound stays unchanged.
    Unresolved(SolveStatus),
}

/// Minimizes or maximizes one target over the relaxation built on `bounds`.
/// The returned value is relaxed outward by the safety margin, and for
/// voltages it is the square root of the solved w_ii value.
pub fn subproblem(
    network: &Network,
    bounds: &BoundSet,
    target: BoundTarget,
    sense: Sense,
    config: &ObbtConfig,
    solver: &dyn ConicSolver,
) -> Result<Endpoint, QcError> {
    let t = target.model_target();
    let objective = match sense {
        Sense::Min => QcObjective::Min(t),
        Sense::Max => QcObjective::Max(t),
    };
    let mut model = build(network, bounds, config.variant.with_objective(objective))?;
    if let Some(cut) = config.objective_cutoff {
        let cost = crate::envelopes::normalize(model.cost.clone());
        model.program.add_row(cost.terms, RowSense::Le, cut - cost.constant);
    }
    let result = match solver.solve(&model.program, &config.solver) {
        Ok(r) => r,
        Err(_) => return Ok(Endpoint::Unresolved(SolveStatus::NumericalFailure)),
    };
    match result.status {
        SolveStatus::Optimal | SolveStatus::AlmostOptimal => {}
        SolveStatus::Infeasible => return Ok(Endpoint::Infeasible),
        other => return Ok(Endpoint::Unresolved(other)),
    }
    // the program minimizes ±target; its lower bound is conservative
    let lb = result.lower_bound();
    let m = config.safety_margin * (1.0 + lb.abs());
    let raw = match sense {
        Sense::Min => lb - m,
        Sense::Max => -lb + m,
    };
    let value = match target {
        BoundTarget::Voltage(_) => raw.max(0.0).sqrt(),
        _ => raw,
    };
    Ok(Endpoint::Bound(value, result.status))
}

/// Narrows `old` with a solved endpoint; the result is always inside `old`.
pub fn narrow(old: Interval, sense: Sense, value: f64) -> Interval {
    match sense {
        Sense::Min => {
            let lo = value.max(old.lo).min(old.hi);
            Interval::new(lo, old.hi)
        }
        Sense::Max => {
            let hi = value.min(old.hi).max(old.lo);
            Interval::new(old.lo, hi)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub target: BoundTarget,
    pub sense: Sense,
    pub old: Interval,
    pub new: Interval,
    /// Solver status name, or the status of the failed solve.
    pub status: String,
}

impl TraceEntry {
    pub fn improvement(&self) -> f64 {
        (self.new.lo - self.old.lo) + (self.old.hi - self.new.hi)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTrace {
    pub entries: Vec<TraceEntry>,
    pub max_improvement: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObbtTrace {
    pub sweeps: Vec<SweepTrace>,
    pub subproblems: usize,
    #[serde(with = "secs")]
    pub wall_time: Duration,
}

impl ObbtTrace {
    /// The trace without wall-clock data, for byte-level comparisons.
    pub fn without_timing(&self) -> ObbtTrace {
        ObbtTrace {
            wall_time: Duration::ZERO,
            ..self.clone()
        }
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObbtOutcome {
    Converged,
    SweepLimit,
    /// A subproblem was infeasible: the instance itself is infeasible.
    Infeasible { target: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObbtRun {
    pub bounds: BoundSet,
    pub trace: ObbtTrace,
    pub outcome: ObbtOutcome,
}

/// Result of one sweep as reported by a policy.
pub struct SweepOutcome {
    pub trace: SweepTrace,
    pub infeasible: Option<String>,
}

/// Everything a sweep policy needs besides the bounds it updates.
pub struct SweepContext<'a> {
    pub network: &'a Network,
    pub links: &'a [Link],
    pub config: &'a ObbtConfig,
    pub solver: &'a dyn ConicSolver,
    pub targets: &'a [(BoundTarget, Sense)],
}

impl SweepContext<'_> {
    /// Applies one solved endpoint and records it.
    fn apply(&self, bounds: &mut BoundSet, target: BoundTarget, sense: Sense, ep: Endpoint) -> TraceEntry {
        let old = target.interval(bounds);
        let (new, status) = match ep {
            Endpoint::Bound(v, s) => (narrow(old, sense, v), s.as_str().to_string()),
            Endpoint::Infeasible => (old, SolveStatus::Infeasible.as_str().to_string()),
            Endpoint::Unresolved(s) => (old, s.as_str().to_string()),
        };
        *target.interval_mut(bounds) = new;
        if matches!(target, BoundTarget::Voltage(_)) {
            bounds.sync_vdiff(self.links);
        }
        TraceEntry {
            target,
            sense,
            old,
            new,
            status,
        }
    }
}

/// Runs sweeps with the policy named by `config` until the largest
/// single-bound improvement of a sweep drops below `tol`.
pub fn tighten(
    network: &Network,
    initial: &BoundSet,
    config: &ObbtConfig,
    solver: &dyn ConicSolver,
) -> Result<ObbtRun, QcError> {
    let policy = SweepPolicyRegistry::builtin()
        .get(config.policy_name())
        .expect("builtin sweep policies");
    tighten_with(network, initial, config, solver, policy.as_ref())
}

pub fn tighten_with(
    network: &Network,
    initial: &BoundSet,
    config: &ObbtConfig,
    solver: &dyn ConicSolver,
    policy: &dyn SweepPolicy,
) -> Result<ObbtRun, QcError> {
    let start = Instant::now();
    let links = links(network)?;
    initial.check(network, &links)?;
    let targets = sweep_targets(network, &links, &config.variant);
    let ctx = SweepContext {
        network,
        links: &links,
        config,
        solver,
        targets: &targets,
    };
    let mut bounds = initial.clone();
    bounds.sync_vdiff(&links);
    let mut trace = ObbtTrace::default();
    let mut outcome = ObbtOutcome::SweepLimit;
    for _ in 0..config.max_sweeps.max(1) {
        let sweep = policy.sweep(&ctx, &mut bounds)?;
        trace.subproblems += sweep.trace.entries.len();
        let improvement = sweep.trace.max_improvement;
        trace.sweeps.push(sweep.trace);
        if let Some(target) = sweep.infeasible {
            outcome = ObbtOutcome::Infeasible { target };
            break;
        }
        if improvement < config.tol {
            outcome = ObbtOutcome::Converged;
            break;
        }
    }
    trace.wall_time = start.elapsed();
    Ok(ObbtRun { bounds, trace, outcome })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn narrowing_stays_inside() {
        let old = Interval::new(0.9, 1.1);
        assert_eq!(narrow(old, Sense::Max, 1.05), Interval::new(0.9, 1.05));
        assert_eq!(narrow(old, Sense::Max, 1.3), old);
        assert_eq!(narrow(old, Sense::Min, 1.2), Interval::new(1.1, 1.1));
        assert_eq!(narrow(old, Sense::Min, 0.5), old);
    }

    #[test]
    fn square_root_of_solved_square() {
        // max w = 1.10 with V̄ = 1.1 gives V̄ = √1.10
        let old = Interval::new(0.9, 1.1);
        let new = narrow(old, Sense::Max, 1.10_f64.sqrt());
        assert!((new.hi - 1.0488).abs() < 1e-4);
    }
}
