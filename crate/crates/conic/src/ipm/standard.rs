//! Compilation of a [`ConicProgram`] into the solver's standard form
//!
//! ```text
//!   minimize  cᵀx
//!   s.t.      E x = f
//!             A x + s = b,   s ∈ ℝ₊ᵐ¹ × Q₁ × … × Q_k
//! ```
//!
//! Fixed variables are substituted out, variable boxes become orthant rows,
//! and rotated cones are mapped onto standard second-order cones.

use std::collections::BTreeMap;

use crate::cones::ConeBlock;
use crate::program::{AffineExpr, ConeKind, ConicProgram, RowSense};

/// Sparse row-major matrix.
#[derive(Debug, Clone, Default)]
pub struct SparseRows {
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (i, r) in self.rows.iter().enumerate() {
            out[i] = r.iter().map(|&(j, a)| a * x[j]).sum();
        }
    }

    /// out += Aᵀ y
    pub fn mul_t_add(&self, y: &[f64], out: &mut [f64]) {
        for (i, r) in self.rows.iter().enumerate() {
            let yi = y[i];
            if yi != 0.0 {
                for &(j, a) in r {
                    out[j] += a * yi;
                }
            }
        }
    }
}

/// Outcome of presolve when the program is decided without iterating.
#[derive(Debug, Clone, PartialEq)]
pub enum Trivial {
    Infeasible(String),
}

#[derive(Debug, Clone)]
pub struct StandardForm {
    pub c: Vec<f64>,
    pub c0: f64,
    pub e: SparseRows,
    pub f: Vec<f64>,
    pub a: SparseRows,
    pub b: Vec<f64>,
    pub blocks: Vec<ConeBlock>,
    /// Original column → reduced column (None when fixed).
    pub col_map: Vec<Option<usize>>,
    pub fixed_values: Vec<f64>,
}

fn merge_terms(terms: impl IntoIterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut m: BTreeMap<usize, f64> = BTreeMap::new();
    for (j, a) in terms {
        *m.entry(j).or_insert(0.0) += a;
    }
    m.into_iter().filter(|&(_, a)| a != 0.0).collect()
}

impl StandardForm {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    /// Reduces an affine expression in original columns to reduced columns.
    fn reduce(&self, terms: &[(usize, f64)], constant: f64) -> (Vec<(usize, f64)>, f64) {
        let mut k = constant;
        let mut out = Vec::with_capacity(terms.len());
        for &(j, a) in terms {
            match self.col_map[j] {
                Some(r) => out.push((r, a)),
                None => k += a * self.fixed_values[j],
            }
        }
        (merge_terms(out), k)
    }

    pub fn compile(p: &ConicProgram) -> Result<Self, Trivial> {
        let n0 = p.num_vars();
        let mut col_map = vec![None; n0];
        let mut fixed_values = vec![0.0; n0];
        let mut n = 0;
        for j in 0..n0 {
            if p.bounds[j].is_fixed() {
                fixed_values[j] = p.bounds[j].lo;
            } else {
                col_map[j] = Some(n);
                n += 1;
            }
        }
        let mut sf = StandardForm {
            c: vec![0.0; n],
            c0: p.objective_constant,
            e: SparseRows { ncols: n, rows: Vec::new() },
            f: Vec::new(),
            a: SparseRows { ncols: n, rows: Vec::new() },
            b: Vec::new(),
            blocks: Vec::new(),
            col_map,
            fixed_values,
        };
        for j in 0..n0 {
            match sf.col_map[j] {
                Some(r) => sf.c[r] += p.objective[j],
                None => sf.c0 += p.objective[j] * sf.fixed_values[j],
            }
        }

        const ROW_TOL: f64 = 1e-9;
        let mut nn_rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
        for (i, row) in p.rows.iter().enumerate() {
            let (terms, k) = sf.reduce(&row.terms, 0.0);
            let rhs = row.rhs - k;
            if terms.is_empty() {
                let ok = match row.sense {
                    RowSense::Eq => rhs.abs() <= ROW_TOL * (1.0 + row.rhs.abs()),
                    RowSense::Le => rhs >= -ROW_TOL * (1.0 + row.rhs.abs()),
                    RowSense::Ge => rhs <= ROW_TOL * (1.0 + row.rhs.abs()),
                };
                if !ok {
                    return Err(Trivial::Infeasible(format!(
                        "row {i} is violated by fixed variables"
                    )));
                }
                continue;
            }
            match row.sense {
                RowSense::Eq => {
                    sf.e.rows.push(terms);
                    sf.f.push(rhs);
                }
                RowSense::Le => nn_rows.push((terms, rhs)),
                RowSense::Ge => nn_rows.push((terms.into_iter().map(|(j, a)| (j, -a)).collect(), -rhs)),
            }
        }
        for j in 0..n0 {
            if let Some(r) = sf.col_map[j] {
                let bd = p.bounds[j];
                if bd.hi.is_finite() {
                    nn_rows.push((vec![(r, 1.0)], bd.hi));
                }
                if bd.lo.is_finite() {
                    nn_rows.push((vec![(r, -1.0)], -bd.lo));
                }
            }
        }

        // Cones: slack s_i = member_i(x) → row (−a_iᵀ) x + s_i = k_i.
        let mut soc_blocks: Vec<Vec<(Vec<(usize, f64)>, f64)>> = Vec::new();
        for (ci, cone) in p.cones.iter().enumerate() {
            let members: Vec<AffineExpr> = match cone.kind {
                ConeKind::SecondOrder => cone.members.clone(),
                ConeKind::RotatedSecondOrder => {
                    let h = std::f64::consts::FRAC_1_SQRT_2;
                    let (u, v) = (&cone.members[0], &cone.members[1]);
                    let mut m = Vec::with_capacity(cone.members.len());
                    m.push(u.clone().scaled(h).plus(v, h));
                    m.push(u.clone().scaled(h).plus(v, -h));
                    m.extend(cone.members[2..].iter().cloned());
                    m
                }
            };
            let reduced: Vec<(Vec<(usize, f64)>, f64)> = members
                .iter()
                .map(|e| sf.reduce(&e.terms, e.constant))
                .collect();
            if reduced.iter().all(|(t, _)| t.is_empty()) {
                let head = reduced[0].1;
                let tail: f64 = reduced[1..].iter().map(|(_, k)| k * k).sum::<f64>().sqrt();
                if tail - head > ROW_TOL * (1.0 + head.abs()) {
                    return Err(Trivial::Infeasible(format!(
                        "cone {ci} is violated by fixed variables"
                    )));
                }
                continue;
            }
            soc_blocks.push(
                reduced
                    .into_iter()
                    .map(|(t, k)| (t.into_iter().map(|(j, a)| (j, -a)).collect(), k))
                    .collect(),
            );
        }

        if !nn_rows.is_empty() {
            sf.blocks.push(ConeBlock::NonNeg {
                start: 0,
                dim: nn_rows.len(),
            });
        }
        for (t, k) in nn_rows {
            sf.a.rows.push(t);
            sf.b.push(k);
        }
        for blk in soc_blocks {
            let start = sf.a.rows.len();
            sf.blocks.push(ConeBlock::SecondOrder { start, dim: blk.len() });
            for (t, k) in blk {
                sf.a.rows.push(t);
                sf.b.push(k);
            }
        }
        Ok(sf)
    }

    /// Expands a reduced primal vector back to the original columns.
    pub fn expand(&self, xr: &[f64]) -> Vec<f64> {
        self.col_map
            .iter()
            .enumerate()
            .map(|(j, m)| match m {
                Some(r) => xr[*r],
                None => self.fixed_values[j],
            })
            .collect()
    }
}

/// Diagonal scalings produced by Ruiz equilibration.
#[derive(Debug, Clone)]
pub struct Equilibration {
    pub d: Vec<f64>,
    pub e_eq: Vec<f64>,
    pub e_cone: Vec<f64>,
    pub cost: f64,
}

impl Equilibration {
    pub fn identity(sf: &StandardForm) -> Self {
        Equilibration {
            d: vec![1.0; sf.num_vars()],
            e_eq: vec![1.0; sf.f.len()],
            e_cone: vec![1.0; sf.b.len()],
            cost: 1.0,
        }
    }
}

/// Scales `sf` in place and returns the scalings applied.
pub fn equilibrate(sf: &mut StandardForm, iters: usize) -> Equilibration {
    let mut eq = Equilibration::identity(sf);
    let n = sf.num_vars();
    const MIN_S: f64 = 1e-4;
    const MAX_S: f64 = 1e4;
    let clamp = |v: f64| if v == 0.0 { 1.0 } else { v.clamp(MIN_S, MAX_S) };
    for _ in 0..iters {
        let mut colmax = vec![0.0f64; n];
        for r in sf.e.rows.iter().chain(sf.a.rows.iter()) {
            for &(j, a) in r {
                colmax[j] = colmax[j].max(a.abs());
            }
        }
        let dcol: Vec<f64> = colmax.iter().map(|&m| clamp(1.0 / m.sqrt())).collect();
        let req: Vec<f64> = sf
            .e
            .rows
            .iter()
            .map(|r| {
                let m = r.iter().map(|&(j, a)| (a * dcol[j]).abs()).fold(0.0, f64::max);
                clamp(1.0 / m.sqrt())
            })
            .collect();
        let mut rcone: Vec<f64> = sf
            .a
            .rows
            .iter()
            .map(|r| r.iter().map(|&(j, a)| (a * dcol[j]).abs()).fold(0.0, f64::max))
            .collect();
        for blk in &sf.blocks {
            match *blk {
                ConeBlock::NonNeg { start, dim } => {
                    for v in &mut rcone[start..start + dim] {
                        *v = clamp(1.0 / v.sqrt());
                    }
                }
                ConeBlock::SecondOrder { start, dim } => {
                    let m = rcone[start..start + dim].iter().copied().fold(0.0, f64::max);
                    let s = clamp(1.0 / m.sqrt());
                    for v in &mut rcone[start..start + dim] {
                        *v = s;
                    }
                }
            }
        }
        for (i, r) in sf.e.rows.iter_mut().enumerate() {
            for t in r.iter_mut() {
                t.1 *= req[i] * dcol[t.0];
            }
            sf.f[i] *= req[i];
            eq.e_eq[i] *= req[i];
        }
        for (i, r) in sf.a.rows.iter_mut().enumerate() {
            for t in r.iter_mut() {
                t.1 *= rcone[i] * dcol[t.0];
            }
            sf.b[i] *= rcone[i];
            eq.e_cone[i] *= rcone[i];
        }
        for j in 0..n {
            sf.c[j] *= dcol[j];
            eq.d[j] *= dcol[j];
        }
    }
    let cmax = sf.c.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let cost = if cmax > 0.0 { (1.0 / cmax).clamp(MIN_S, MAX_S) } else { 1.0 };
    sf.c.iter_mut().for_each(|v| *v *= cost);
    eq.cost = cost;
    eq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{ConeConstraint, VarBounds};

    #[test]
    fn fixed_variables_are_substituted() {
        let mut p = ConicProgram::new();
        let x = p.add_var("x", VarBounds::new(2.0, 2.0));
        let y = p.add_var("y", VarBounds::FREE);
        p.add_row(vec![(x, 1.0), (y, 1.0)], RowSense::Eq, 5.0);
        p.set_objective(&[(x, 3.0), (y, 1.0)], 0.0);
        let sf = StandardForm::compile(&p).unwrap();
        assert_eq!(sf.num_vars(), 1);
        assert_eq!(sf.f, vec![3.0]);
        assert_eq!(sf.c0, 6.0);
        assert_eq!(sf.expand(&[3.0]), vec![2.0, 3.0]);
    }

    #[test]
    fn violated_constant_row_is_infeasible() {
        let mut p = ConicProgram::new();
        let x = p.add_var("x", VarBounds::new(0.0, 0.0));
        p.add_row(vec![(x, 1.0)], RowSense::Ge, 1.0);
        assert!(matches!(StandardForm::compile(&p), Err(Trivial::Infeasible(_))));
    }

    #[test]
    fn rotated_cone_maps_to_soc() {
        let mut p = ConicProgram::new();
        let u = p.add_var("u", VarBounds::FREE);
        p.add_cone(ConeConstraint::rotated(vec![
            AffineExpr::var(u),
            AffineExpr::constant(1.0),
            AffineExpr::constant(2.0),
        ]));
        let sf = StandardForm::compile(&p).unwrap();
        assert_eq!(sf.blocks, vec![ConeBlock::SecondOrder { start: 0, dim: 3 }]);
        // s0 = (u + 1)/√2 → row −u/√2 with constant 1/√2
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sf.a.rows[0][0].1 + h).abs() < 1e-15);
        assert!((sf.b[0] - h).abs() < 1e-15);
    }
}
