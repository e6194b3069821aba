//! Assembly of the QC relaxation as a second-order cone program.

mod acpoint;
mod bounds;
mod build;

use std::collections::BTreeMap;
use std::fmt;

use qcrelax_conic::{AffineExpr, ConicProgram};
use serde::{Deserialize, Serialize};

use crate::envelopes::{EnvelopeError, TrigKind, TrilinearEnvelope};
use crate::netdata::NetError;

pub use acpoint::{branch_flows, check_ac_point, lift_ac_point, AcPoint, AcResidual, BranchFlows};
pub use bounds::{derive_lifted_bounds, links, BoundSet, LiftedBounds, Link};
pub use build::{build, build_with, flow_coefficients, FlowCoefficients};

#[derive(Debug, thiserror::Error)]
pub enum QcError {
    #[error("invalid bounds: {0}")]
    Bounds(String),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error(transparent)]
    Network(#[from] NetError),
    #[error("unknown trilinear relaxation '{0}'")]
    UnknownRelaxation(String),
    #[error("variable {0} is not part of the model")]
    MissingVariable(VarTag),
}

/// Model column identities. Bus, generator and branch payloads are positions
/// in the network lists; link payloads index `QcModel::links`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum VarTag {
    Pg(usize),
    Qg(usize),
    /// Epigraph of the quadratic cost term of one generator.
    CostEpi(usize),
    Theta(usize),
    V(usize),
    W(usize),
    WLink(usize),
    C(usize),
    S(usize),
    CosDummy(usize),
    SinDummy(usize),
    Pft(usize),
    Qft(usize),
    Ptf(usize),
    Qtf(usize),
    VDiff(usize),
    WDiff(usize),
    WHatL(usize),
    WHatM(usize),
}

impl fmt::Display for VarTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, k) = match *self {
            VarTag::Pg(k) => ("pg", k),
            VarTag::Qg(k) => ("qg", k),
            VarTag::CostEpi(k) => ("cost_epi", k),
            VarTag::Theta(k) => ("theta", k),
            VarTag::V(k) => ("v", k),
            VarTag::W(k) => ("w", k),
            VarTag::WLink(k) => ("w_link", k),
            VarTag::C(k) => ("c", k),
            VarTag::S(k) => ("s", k),
            VarTag::CosDummy(k) => ("cos", k),
            VarTag::SinDummy(k) => ("sin", k),
            VarTag::Pft(k) => ("p_ft", k),
            VarTag::Qft(k) => ("q_ft", k),
            VarTag::Ptf(k) => ("p_tf", k),
            VarTag::Qtf(k) => ("q_tf", k),
            VarTag::VDiff(k) => ("vdiff", k),
            VarTag::WDiff(k) => ("wdiff", k),
            VarTag::WHatL(k) => ("what_l", k),
            VarTag::WHatM(k) => ("what_m", k),
        };
        write!(f, "{name}[{k}]")
    }
}

/// Quantity an objective or a bound-tightening subproblem targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Var(VarTag),
    /// θ_l − θ_m of a link.
    AngleDiff(usize),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Var(v) => write!(f, "{v}"),
            Target::AngleDiff(k) => write!(f, "theta_diff[{k}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QcObjective {
    #[default]
    Cost,
    Min(Target),
    Max(Target),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcVariant {
    /// Add Meyer–Floudas trilinear envelopes to nested McCormick.
    pub use_mf: bool,
    /// Voltage-magnitude-difference constraints.
    pub use_vdiff: bool,
    pub objective: QcObjective,
}

impl Default for QcVariant {
    fn default() -> Self {
        QcVariant {
            use_mf: true,
            use_vdiff: true,
            objective: QcObjective::Cost,
        }
    }
}

impl QcVariant {
    pub const fn new(use_mf: bool, use_vdiff: bool) -> Self {
        QcVariant {
            use_mf,
            use_vdiff,
            objective: QcObjective::Cost,
        }
    }

    pub fn with_objective(mut self, objective: QcObjective) -> Self {
        self.objective = objective;
        self
    }

    /// Registry name of the trilinear relaxation this variant uses.
    pub fn relaxation_name(&self) -> &'static str {
        if self.use_mf {
            "meyer-floudas-linked"
        } else {
            "nested-mccormick"
        }
    }
}

/// Record of how one trilinear product was relaxed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrilinearReport {
    pub link: usize,
    pub kind: TrigKind,
    pub envelope: TrilinearEnvelope,
}

#[derive(Debug, Clone)]
pub struct QcModel {
    pub program: ConicProgram,
    pub var_map: BTreeMap<VarTag, usize>,
    pub bounds: BoundSet,
    pub variant: QcVariant,
    pub links: Vec<Link>,
    /// Generation cost in program columns, constant included.
    pub cost: AffineExpr,
    pub trilinear: Vec<TrilinearReport>,
}

impl QcModel {
    pub fn col(&self, tag: VarTag) -> Result<usize, QcError> {
        self.var_map.get(&tag).copied().ok_or(QcError::MissingVariable(tag))
    }

    /// Affine expression of a target quantity.
    pub fn target_expr(&self, target: Target) -> Result<AffineExpr, QcError> {
        match target {
            Target::Var(tag) => Ok(AffineExpr::var(self.col(tag)?)),
            Target::AngleDiff(k) => {
                let lk = &self.links[k];
                let l = self.col(VarTag::Theta(lk.l))?;
                let m = self.col(VarTag::Theta(lk.m))?;
                Ok(AffineExpr::new(vec![(l, 1.0), (m, -1.0)], 0.0))
            }
        }
    }

    pub fn value(&self, x: &[f64], tag: VarTag) -> Option<f64> {
        self.var_map.get(&tag).map(|&j| x[j])
    }
}
