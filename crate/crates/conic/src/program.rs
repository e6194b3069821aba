use serde::{Deserialize, Serialize};

use crate::error::ConicError;

/// Sparse affine expression `Σ coef·x[col] + constant`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn new(terms: Vec<(usize, f64)>, constant: f64) -> Self {
        AffineExpr { terms, constant }
    }

    pub fn var(col: usize) -> Self {
        AffineExpr {
            terms: vec![(col, 1.0)],
            constant: 0.0,
        }
    }

    pub fn constant(c: f64) -> Self {
        AffineExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum::<f64>() + self.constant
    }

    pub fn scaled(mut self, k: f64) -> Self {
        self.terms.iter_mut().for_each(|t| t.1 *= k);
        self.constant *= k;
        self
    }

    pub fn plus(mut self, other: &AffineExpr, k: f64) -> Self {
        self.terms.extend(other.terms.iter().map(|&(j, a)| (j, a * k)));
        self.constant += other.constant * k;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

/// `Σ coef·x[col]  (≤ | ≥ | =)  rhs`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl LinearRow {
    /// Signed violation: positive means the row is violated by that amount.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.terms.iter().map(|&(j, a)| a * x[j]).sum();
        match self.sense {
            RowSense::Le => lhs - self.rhs,
            RowSense::Ge => self.rhs - lhs,
            RowSense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    /// ‖(e₁,…,e_k)‖₂ ≤ e₀
    SecondOrder,
    /// 2·e₀·e₁ ≥ ‖(e₂,…,e_k)‖², e₀, e₁ ≥ 0
    RotatedSecondOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeConstraint {
    pub kind: ConeKind,
    pub members: Vec<AffineExpr>,
}

impl ConeConstraint {
    pub fn second_order(members: Vec<AffineExpr>) -> Self {
        ConeConstraint {
            kind: ConeKind::SecondOrder,
            members,
        }
    }

    pub fn rotated(members: Vec<AffineExpr>) -> Self {
        ConeConstraint {
            kind: ConeKind::RotatedSecondOrder,
            members,
        }
    }

    /// Distance-like violation; ≤ 0 when the point is inside the cone.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let v: Vec<f64> = self.members.iter().map(|e| e.eval(x)).collect();
        match self.kind {
            ConeKind::SecondOrder => {
                let tail: f64 = v[1..].iter().map(|a| a * a).sum::<f64>().sqrt();
                tail - v[0]
            }
            ConeKind::RotatedSecondOrder => {
                // equivalent SOC: ‖(u − v, √2·x)‖ ≤ u + v
                let (u, w) = (v[0], v[1]);
                let tail: f64 = v[2..].iter().map(|a| 2.0 * a * a).sum::<f64>();
                let t = ((u - w) * (u - w) + tail).sqrt();
                (t - (u + w)) / std::f64::consts::SQRT_2
            }
        }
    }
}

/// Lower/upper bound on one variable; infinities mean unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarBounds {
    #[serde(with = "inf_float")]
    pub lo: f64,
    #[serde(with = "inf_float")]
    pub hi: f64,
}

impl VarBounds {
    pub const FREE: VarBounds = VarBounds {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        VarBounds { lo, hi }
    }

    pub fn is_fixed(&self) -> bool {
        self.lo == self.hi
    }
}

/// JSON has no infinities; encode them as strings.
mod inf_float {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Raw::Str(s) => Err(de::Error::custom(format!("bad bound {s}"))),
        }
    }
}

/// Minimize `objective·x + objective_constant` subject to linear rows,
/// second-order / rotated cones over affine expressions, and variable boxes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConicProgram {
    pub var_names: Vec<String>,
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub rows: Vec<LinearRow>,
    pub cones: Vec<ConeConstraint>,
    pub bounds: Vec<VarBounds>,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, bounds: VarBounds) -> usize {
        self.var_names.push(name.into());
        self.objective.push(0.0);
        self.bounds.push(bounds);
        self.var_names.len() - 1
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, sense: RowSense, rhs: f64) {
        self.rows.push(LinearRow { terms, sense, rhs });
    }

    pub fn add_cone(&mut self, cone: ConeConstraint) {
        self.cones.push(cone);
    }

    pub fn set_objective(&mut self, coeffs: &[(usize, f64)], constant: f64) {
        self.objective.iter_mut().for_each(|c| *c = 0.0);
        for &(j, a) in coeffs {
            self.objective[j] += a;
        }
        self.objective_constant = constant;
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.objective_constant
    }

    /// Checks index ranges and cone arities.
    pub fn validate(&self) -> Result<(), ConicError> {
        let n = self.num_vars();
        if self.objective.len() != n || self.bounds.len() != n {
            return Err(ConicError::Malformed(
                "objective/bounds length differs from variable count".into(),
            ));
        }
        let check = |terms: &[(usize, f64)], what: &str| -> Result<(), ConicError> {
            for &(j, a) in terms {
                if j >= n {
                    return Err(ConicError::Malformed(format!(
                        "{what} references variable {j} >= {n}"
                    )));
                }
                if !a.is_finite() {
                    return Err(ConicError::Malformed(format!("{what} has a non-finite coefficient")));
                }
            }
            Ok(())
        };
        for (i, r) in self.rows.iter().enumerate() {
            check(&r.terms, &format!("row {i}"))?;
            if !r.rhs.is_finite() {
                return Err(ConicError::Malformed(format!("row {i} has a non-finite rhs")));
            }
        }
        for (i, c) in self.cones.iter().enumerate() {
            let min = match c.kind {
                ConeKind::SecondOrder => 2,
                ConeKind::RotatedSecondOrder => 3,
            };
            if c.members.len() < min {
                return Err(ConicError::Malformed(format!(
                    "cone {i} has {} members, needs at least {min}",
                    c.members.len()
                )));
            }
            for m in &c.members {
                check(&m.terms, &format!("cone {i}"))?;
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if b.lo > b.hi || b.lo.is_nan() || b.hi.is_nan() {
                return Err(ConicError::Malformed(format!(
                    "variable {} has empty bounds [{}, {}]",
                    self.var_names[j], b.lo, b.hi
                )));
            }
        }
        Ok(())
    }

    /// Residual report of a candidate point.
    pub fn evaluate(&self, x: &[f64]) -> Result<ResidualReport, ConicError> {
        if x.len() != self.num_vars() {
            return Err(ConicError::DimensionMismatch {
                expected: self.num_vars(),
                got: x.len(),
            });
        }
        let rows: Vec<f64> = self.rows.iter().map(|r| r.violation(x).max(0.0)).collect();
        let cones: Vec<f64> = self.cones.iter().map(|c| c.violation(x).max(0.0)).collect();
        let boxes: Vec<f64> = self
            .bounds
            .iter()
            .zip(x)
            .map(|(b, &v)| (b.lo - v).max(v - b.hi).max(0.0))
            .collect();
        let max_of = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        Ok(ResidualReport {
            max_row: max_of(&rows),
            max_cone: max_of(&cones),
            max_box: max_of(&boxes),
            rows,
            cones,
            boxes,
            objective: self.objective_value(x),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("program serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ConicError> {
        serde_json::from_str(text).map_err(|e| ConicError::Malformed(e.to_string()))
    }
}

/// Per-constraint nonnegative violations of a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub rows: Vec<f64>,
    pub cones: Vec<f64>,
    pub boxes: Vec<f64>,
    pub max_row: f64,
    pub max_cone: f64,
    pub max_box: f64,
    pub objective: f64,
}

impl ResidualReport {
    pub fn max_violation(&self) -> f64 {
        self.max_row.max(self.max_cone).max(self.max_box)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_vector_violates_lower_row_by_one() {
        let mut p = ConicProgram::new();
        let x = p.add_var("x", VarBounds::FREE);
        p.add_row(vec![(x, 1.0)], RowSense::Ge, 1.0);
        let r = p.evaluate(&[0.0]).unwrap();
        assert_eq!(r.max_row, 1.0);
    }

    #[test]
    fn unconstrained_program_has_no_violations() {
        let mut p = ConicProgram::new();
        p.add_var("x", VarBounds::FREE);
        p.add_var("y", VarBounds::FREE);
        let r = p.evaluate(&[3.0, -7.0]).unwrap();
        assert!(r.rows.is_empty() && r.cones.is_empty());
        assert_eq!(r.max_violation(), 0.0);
    }

    #[test]
    fn json_round_trip_keeps_infinite_bounds() {
        let mut p = ConicProgram::new();
        let x = p.add_var("x", VarBounds::new(0.0, f64::INFINITY));
        p.add_cone(ConeConstraint::rotated(vec![
            AffineExpr::var(x),
            AffineExpr::constant(1.0),
            AffineExpr::constant(2.0),
        ]));
        let back = ConicProgram::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn rotated_violation_sign() {
        let c = ConeConstraint::rotated(vec![
            AffineExpr::var(0),
            AffineExpr::constant(1.0),
            AffineExpr::constant(2.0),
        ]);
        assert!(c.violation(&[2.0]) <= 1e-15);
        assert!(c.violation(&[1.9]) > 0.0);
    }
}
