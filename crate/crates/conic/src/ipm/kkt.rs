//! Quasi-definite KKT system
//!
//! ```text
//!   [ δI   Eᵀ   Aᵀ    ] [Δx]
//!   [ E   −δI   0     ] [Δy]
//!   [ A    0   −W²−δI ] [Δz]
//! ```
//!
//! factored once per iteration; solves are refined against the system
//! without the static δ terms.

use crate::cones::{BlockScaling, ConeBlock};
use crate::ldl::{CscUpper, FactorError, LdlFactor};

use super::standard::StandardForm;

pub struct KktSystem {
    n: usize,
    p: usize,
    m: usize,
    mat: CscUpper,
    diag_slots: Vec<usize>,
    /// For every cone block, the slots of its (i ≤ j) entries in row-major
    /// upper order.
    block_slots: Vec<Vec<usize>>,
    signs: Vec<f64>,
    factor: LdlFactor,
    static_reg: f64,
    refine_steps: usize,
    work: Vec<f64>,
    resid: Vec<f64>,
}

impl KktSystem {
    pub fn new(sf: &StandardForm, static_reg: f64, refine_steps: usize) -> Self {
        let n = sf.num_vars();
        let p = sf.f.len();
        let m = sf.b.len();
        let dim = n + p + m;
        let mut entries: Vec<(usize, usize)> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        for i in 0..dim {
            entries.push((i, i));
            values.push(0.0);
        }
        for (r, row) in sf.e.rows.iter().enumerate() {
            for &(j, a) in row {
                entries.push((j, n + r));
                values.push(a);
            }
        }
        for (r, row) in sf.a.rows.iter().enumerate() {
            for &(j, a) in row {
                entries.push((j, n + p + r));
                values.push(a);
            }
        }
        let mut block_entry_ids = Vec::with_capacity(sf.blocks.len());
        for blk in &sf.blocks {
            let mut ids = Vec::new();
            if let ConeBlock::SecondOrder { start, dim } = *blk {
                for i in 0..dim {
                    for j in i..dim {
                        ids.push(entries.len());
                        entries.push((n + p + start + i, n + p + start + j));
                        values.push(0.0);
                    }
                }
            }
            block_entry_ids.push(ids);
        }
        let (mut mat, map) = CscUpper::from_pattern(dim, &entries);
        for (k, v) in values.iter().enumerate() {
            mat.nzval[map[k]] += v;
        }
        let diag_slots: Vec<usize> = (0..dim).map(|i| map[i]).collect();
        let block_slots = block_entry_ids
            .into_iter()
            .map(|ids| ids.into_iter().map(|k| map[k]).collect())
            .collect();
        let mut signs = vec![1.0; n];
        signs.extend(std::iter::repeat(-1.0).take(p + m));
        let factor = LdlFactor::analyze(&mat, &signs);
        KktSystem {
            n,
            p,
            m,
            mat,
            diag_slots,
            block_slots,
            signs,
            factor,
            static_reg,
            refine_steps,
            work: vec![0.0; dim],
            resid: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.n + self.p + self.m
    }

    fn set_static_diag(&mut self) {
        let d = self.static_reg;
        for i in 0..self.n + self.p {
            let s = self.signs[i];
            self.mat.nzval[self.diag_slots[i]] = s * d;
        }
    }

    /// Sets the cone block to −I (used for the initial point).
    pub fn factor_identity(&mut self, blocks: &[ConeBlock]) -> Result<(), FactorError> {
        self.set_static_diag();
        let off = self.n + self.p;
        for (b, blk) in blocks.iter().enumerate() {
            let r = blk.range();
            match blk {
                ConeBlock::NonNeg { .. } => {
                    for i in r {
                        self.mat.nzval[self.diag_slots[off + i]] = -1.0 - self.static_reg;
                    }
                }
                ConeBlock::SecondOrder { dim, .. } => {
                    let mut k = 0;
                    for i in 0..*dim {
                        for j in i..*dim {
                            let v = if i == j { -1.0 - self.static_reg } else { 0.0 };
                            self.mat.nzval[self.block_slots[b][k]] = v;
                            k += 1;
                        }
                    }
                }
            }
        }
        self.factor.factor(&self.mat)
    }

    /// Sets the cone block to −W² and factors.
    pub fn factor_scaled(&mut self, blocks: &[ConeBlock], scalings: &[BlockScaling]) -> Result<(), FactorError> {
        self.set_static_diag();
        let off = self.n + self.p;
        for (b, (blk, w)) in blocks.iter().zip(scalings).enumerate() {
            match (blk, w) {
                (ConeBlock::NonNeg { start, .. }, BlockScaling::NonNeg(wv)) => {
                    for (i, wi) in wv.iter().enumerate() {
                        self.mat.nzval[self.diag_slots[off + start + i]] = -wi * wi - self.static_reg;
                    }
                }
                (ConeBlock::SecondOrder { dim, .. }, BlockScaling::SecondOrder { .. }) => {
                    let w2 = w.squared();
                    let mut k = 0;
                    for i in 0..*dim {
                        for j in i..*dim {
                            let mut v = -w2[i * dim + j];
                            if i == j {
                                v -= self.static_reg;
                            }
                            self.mat.nzval[self.block_slots[b][k]] = v;
                            k += 1;
                        }
                    }
                }
                _ => unreachable!("scaling kind matches block kind"),
            }
        }
        self.factor.factor(&self.mat)
    }

    /// K₀ x where K₀ omits the static regularization.
    fn mul_unregularized(&self, x: &[f64], out: &mut [f64]) {
        self.mat.sym_mul(x, out);
        let d = self.static_reg;
        for i in 0..self.dim() {
            out[i] -= self.signs[i] * d * x[i];
        }
    }

    /// Solves K₀ x = rhs; `rhs` is overwritten with the solution. A
    /// refinement step is kept only if it lowers the residual.
    pub fn solve(&mut self, rhs: &mut [f64]) {
        let dim = self.dim();
        let b: Vec<f64> = rhs.to_vec();
        self.factor.solve(rhs);
        let bnorm = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut rnorm = self.residual(&b, rhs);
        for _ in 0..self.refine_steps {
            if rnorm <= 1e-14 * (1.0 + bnorm) {
                break;
            }
            let mut dx = self.resid.clone();
            self.factor.solve(&mut dx);
            let trial: Vec<f64> = (0..dim).map(|i| rhs[i] + dx[i]).collect();
            let saved = std::mem::take(&mut self.resid);
            let r = self.residual(&b, &trial);
            if r >= rnorm {
                self.resid = saved;
                break;
            }
            rhs.copy_from_slice(&trial);
            rnorm = r;
        }
    }

    /// Stores b − K₀x in `resid` and returns its max norm.
    fn residual(&mut self, b: &[f64], x: &[f64]) -> f64 {
        let mut kx = std::mem::take(&mut self.work);
        self.mul_unregularized(x, &mut kx);
        self.resid.resize(b.len(), 0.0);
        let mut rnorm: f64 = 0.0;
        for i in 0..b.len() {
            self.resid[i] = b[i] - kx[i];
            rnorm = rnorm.max(self.resid[i].abs());
        }
        self.work = kx;
        rnorm
    }
}
