//! Solver backends behind a common trait, looked up by name.
//!
//! The built-in interior-point method is registered as `ipm`. An external
//! solver can be plugged in by implementing [`ConicSolver`] and registering
//! it; callers select a backend by name at runtime.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::ConicError;
use crate::ipm::InteriorPoint;
use crate::program::ConicProgram;
use crate::solution::{SolveResult, SolverSettings};

pub trait ConicSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, program: &ConicProgram, settings: &SolverSettings) -> Result<SolveResult, ConicError>;
}

#[derive(Clone, Default)]
pub struct SolverRegistry {
    solvers: BTreeMap<String, Arc<dyn ConicSolver>>,
}

impl SolverRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry with the built-in backends.
    pub fn builtin() -> Self {
        let mut r = Self::new();
        r.register(InteriorPoint);
        r
    }

    pub fn register<S: ConicSolver + 'static>(&mut self, solver: S) {
        self.solvers.insert(solver.name().to_string(), Arc::new(solver));
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ConicSolver>, ConicError> {
        self.solvers
            .get(name)
            .cloned()
            .ok_or_else(|| ConicError::UnknownSolver(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.solvers.keys().map(|s| s.as_str())
    }
}

impl std::fmt::Debug for SolverRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_has_ipm_and_rejects_unknown() {
        let r = SolverRegistry::builtin();
        assert_eq!(r.get("ipm").unwrap().name(), "ipm");
        assert!(matches!(r.get("mosek"), Err(ConicError::UnknownSolver(_))));
    }
}
