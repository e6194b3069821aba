use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Tolerances and limits for a solve call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Primal and dual feasibility tolerance (relative to data scale).
    pub feas: f64,
    /// Relative duality-gap tolerance.
    pub gap: f64,
    pub max_iters: usize,
    /// Static regularization added to the KKT diagonal.
    pub static_reg: f64,
    /// Iterative refinement steps per KKT solve.
    pub refine_steps: usize,
    /// Ruiz equilibration passes (0 disables scaling).
    pub equilibrate_iters: usize,
    /// Looser feasibility and gap tolerances accepted, as almost optimal,
    /// for the best iterate when the iteration stalls or runs out.
    pub reduced_feas: f64,
    pub reduced_gap: f64,
    /// Largest ray residual, relative to the ray's objective, accepted as a
    /// certificate of infeasibility or unboundedness.
    pub infeas: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            feas: 1e-8,
            gap: 1e-8,
            max_iters: 200,
            static_reg: 1e-8,
            refine_steps: 10,
            equilibrate_iters: 15,
            reduced_feas: 1e-5,
            reduced_gap: 1e-5,
            infeas: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    /// Best iterate met only the reduced tolerances.
    AlmostOptimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
    IterationLimit,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::AlmostOptimal => "almost-optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NumericalFailure => "numerical-failure",
            SolveStatus::IterationLimit => "iteration-limit",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Present iff status is optimal or almost optimal.
    pub primal: Option<Vec<f64>>,
    /// Primal objective at the returned point (including the constant).
    pub objective: f64,
    /// Dual objective; a valid lower bound when the dual residual is small.
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Relative duality gap.
    pub gap: f64,
    pub iterations: usize,
    #[serde(with = "duration_secs")]
    pub wall_time: Duration,
    /// Short description of the Farkas certificate when infeasible/unbounded.
    pub certificate: Option<String>,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Optimal or almost optimal: a primal point and objectives are present.
    pub fn has_solution(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::AlmostOptimal)
    }

    /// The smaller of primal and dual objectives: a conservative lower bound
    /// on the optimum of a minimization at the solve tolerance.
    pub fn lower_bound(&self) -> f64 {
        self.objective.min(self.dual_objective)
    }
}

mod duration_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}
