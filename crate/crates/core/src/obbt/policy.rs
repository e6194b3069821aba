//! Within-sweep update policies, selected by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::{subproblem, Endpoint, SweepContext, SweepOutcome, SweepTrace};
use crate::qcmodel::{BoundSet, QcError};

pub trait SweepPolicy: Send + Sync {
    fn name(&self) -> &'static str;
    fn sweep(&self, ctx: &SweepContext<'_>, bounds: &mut BoundSet) -> Result<SweepOutcome, QcError>;
}

/// Each solved bound is applied before the next subproblem is built.
pub struct Sequential;

impl SweepPolicy for Sequential {
    fn name(&self) -> &'static str {
        "sequential"
    }

    fn sweep(&self, ctx: &SweepContext<'_>, bounds: &mut BoundSet) -> Result<SweepOutcome, QcError> {
        let mut trace = SweepTrace::default();
        for &(target, sense) in ctx.targets {
            let ep = subproblem(ctx.network, bounds, target, sense, ctx.config, ctx.solver)?;
            let entry = ctx.apply(bounds, target, sense, ep);
            trace.max_improvement = trace.max_improvement.max(entry.improvement());
            trace.entries.push(entry);
            if ep == Endpoint::Infeasible {
                return Ok(SweepOutcome {
                    trace,
                    infeasible: Some(format!("{target} ({:?})", sense)),
                });
            }
        }
        Ok(SweepOutcome { trace, infeasible: None })
    }
}

/// All subproblems of a sweep see the sweep-start bounds; results are merged
/// in target order afterwards.
pub struct Parallel;

impl SweepPolicy for Parallel {
    fn name(&self) -> &'static str {
        "parallel"
    }

    fn sweep(&self, ctx: &SweepContext<'_>, bounds: &mut BoundSet) -> Result<SweepOutcome, QcError> {
        let snapshot = bounds.clone();
        let endpoints: Vec<Endpoint> = ctx
            .targets
            .par_iter()
            .map(|&(target, sense)| subproblem(ctx.network, &snapshot, target, sense, ctx.config, ctx.solver))
            .collect::<Result<_, _>>()?;
        let mut trace = SweepTrace::default();
        let mut infeasible = None;
        for (&(target, sense), ep) in ctx.targets.iter().zip(endpoints) {
            let entry = ctx.apply(bounds, target, sense, ep);
            trace.max_improvement = trace.max_improvement.max(entry.improvement());
            trace.entries.push(entry);
            if ep == Endpoint::Infeasible && infeasible.is_none() {
                infeasible = Some(format!("{target} ({:?})", sense));
            }
        }
        Ok(SweepOutcome { trace, infeasible })
    }
}

#[derive(Clone, Default)]
pub struct SweepPolicyRegistry {
    entries: BTreeMap<&'static str, Arc<dyn SweepPolicy>>,
}

impl SweepPolicyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn builtin() -> Self {
        let mut r = Self::new();
        r.register(Sequential);
        r.register(Parallel);
        r
    }

    pub fn register<P: SweepPolicy + 'static>(&mut self, policy: P) {
        self.entries.insert(policy.name(), Arc::new(policy));
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn SweepPolicy>> {
        self.entries.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().copied()
    }
}
