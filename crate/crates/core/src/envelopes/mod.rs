//! Convex envelopes of the square, bilinear, trigonometric and trilinear
//! terms of the polar power-flow equations, over box domains.
//!
//! Every generator works on affine expressions over program columns, so the
//! same facet code serves the model builder and the grid oracles.

mod basic;
mod interval;
mod registry;
mod trilinear;

use qcrelax_conic::{AffineExpr, ConeConstraint, RowSense};
use serde::{Deserialize, Serialize};

pub use basic::{cos_envelope, mccormick, sin_envelope, square_envelope, trig_bounds, TrigBounds};
pub use interval::Interval;
pub use registry::{MeyerFloudas, MeyerFloudasLinked, NestedMcCormick, TrilinearRegistry, TrilinearRelaxation};
pub use trilinear::{mf_trilinear, nested_mccormick, MfCase, TrigKind, TrilinearEnvelope, TrilinearTerm};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvelopeError {
    #[error("trilinear envelope needs positive voltage lower bounds, got {0} and {1}")]
    Domain(f64, f64),
}

/// `expr (sense) 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFacet {
    pub expr: AffineExpr,
    pub sense: RowSense,
}

impl LinearFacet {
    pub fn le(expr: AffineExpr) -> Self {
        LinearFacet {
            expr: normalize(expr),
            sense: RowSense::Le,
        }
    }

    pub fn ge(expr: AffineExpr) -> Self {
        LinearFacet {
            expr: normalize(expr),
            sense: RowSense::Ge,
        }
    }

    pub fn eq(expr: AffineExpr) -> Self {
        LinearFacet {
            expr: normalize(expr),
            sense: RowSense::Eq,
        }
    }

    /// Signed slack at `x`: non-negative iff the facet holds.
    pub fn slack(&self, x: &[f64]) -> f64 {
        let v = self.expr.eval(x);
        match self.sense {
            RowSense::Le => -v,
            RowSense::Ge => v,
            RowSense::Eq => -v.abs(),
        }
    }

    /// Row form `terms (sense) rhs`.
    pub fn into_row(self) -> (Vec<(usize, f64)>, RowSense, f64) {
        (self.expr.terms, self.sense, -self.expr.constant)
    }
}

/// Linear facets plus the conic relations of one envelope.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Envelope {
    pub facets: Vec<LinearFacet>,
    pub cones: Vec<ConeConstraint>,
}

impl Envelope {
    /// Smallest signed slack over all facets and cones.
    pub fn worst_slack(&self, x: &[f64]) -> f64 {
        let f = self.facets.iter().map(|f| f.slack(x));
        let c = self.cones.iter().map(|c| -c.violation(x));
        f.chain(c).fold(f64::INFINITY, f64::min)
    }
}

/// Merges repeated columns and drops zero coefficients.
pub fn normalize(mut expr: AffineExpr) -> AffineExpr {
    expr.terms.sort_by_key(|t| t.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(expr.terms.len());
    for (j, a) in expr.terms {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    AffineExpr::new(out, expr.constant)
}

/// Σ kᵢ·eᵢ + c.
pub fn combine(parts: &[(&AffineExpr, f64)], constant: f64) -> AffineExpr {
    let mut acc = AffineExpr::constant(constant);
    for (e, k) in parts {
        if *k != 0.0 {
            acc = acc.plus(e, *k);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_merges_and_drops() {
        let e = AffineExpr::new(vec![(2, 1.0), (0, 3.0), (2, -1.0), (0, 1.0)], 0.5);
        let n = normalize(e);
        assert_eq!(n.terms, vec![(0, 4.0)]);
        assert_eq!(n.constant, 0.5);
    }

    #[test]
    fn facet_slack_signs() {
        let x = AffineExpr::var(0);
        let f = LinearFacet::le(combine(&[(&x, 1.0)], -1.0));
        assert_eq!(f.slack(&[0.25]), 0.75);
        assert_eq!(f.slack(&[2.0]), -1.0);
        let (terms, sense, rhs) = f.into_row();
        assert_eq!((terms, sense, rhs), (vec![(0, 1.0)], RowSense::Le, 1.0));
    }
}
