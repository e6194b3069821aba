//! Linear and second-order cone programming: a small modeling layer
//! ([`ConicProgram`]) and a homogeneous self-dual interior-point solver.

pub mod cones;
mod error;
pub mod ipm;
pub mod ldl;
mod program;
mod registry;
mod solution;

pub use error::ConicError;
pub use ipm::InteriorPoint;
pub use program::{
    AffineExpr, ConeConstraint, ConeKind, ConicProgram, LinearRow, ResidualReport, RowSense, VarBounds,
};
pub use registry::{ConicSolver, SolverRegistry};
pub use solution::{SolveResult, SolveStatus, SolverSettings};

/// Solves with the built-in interior-point method.
pub fn solve(program: &ConicProgram, settings: &SolverSettings) -> Result<SolveResult, ConicError> {
    InteriorPoint.solve(program, settings)
}
