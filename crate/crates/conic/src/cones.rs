//! Symmetric cone algebra used by the interior-point iteration: Jordan
//! products, Nesterov–Todd scalings, and step-to-boundary computations for
//! the nonnegative orthant and second-order cones.

/// A contiguous block of the slack vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeBlock {
    NonNeg { start: usize, dim: usize },
    SecondOrder { start: usize, dim: usize },
}

impl ConeBlock {
    pub fn range(&self) -> std::ops::Range<usize> {
        match *self {
            ConeBlock::NonNeg { start, dim } | ConeBlock::SecondOrder { start, dim } => {
                start..start + dim
            }
        }
    }

    pub fn degree(&self) -> usize {
        match *self {
            ConeBlock::NonNeg { dim, .. } => dim,
            ConeBlock::SecondOrder { .. } => 1,
        }
    }
}

/// Nesterov–Todd scaling for one block.
#[derive(Debug, Clone)]
pub enum BlockScaling {
    /// w_i = sqrt(s_i / z_i)
    NonNeg(Vec<f64>),
    /// W = eta * [w0 w1'; w1 I + w1 w1'/(1+w0)]
    SecondOrder { eta: f64, w: Vec<f64> },
}

fn soc_residual(u: &[f64]) -> f64 {
    let tail: f64 = u[1..].iter().map(|v| v * v).sum();
    (u[0] - tail.sqrt()) * (u[0] + tail.sqrt())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Smallest "eigenvalue" of a block vector: min entry for the orthant,
/// u0 - ||u1|| for the second-order cone.
pub fn min_eigen(block: &ConeBlock, u: &[f64]) -> f64 {
    let r = block.range();
    let u = &u[r];
    match block {
        ConeBlock::NonNeg { .. } => u.iter().copied().fold(f64::INFINITY, f64::min),
        ConeBlock::SecondOrder { .. } => {
            let tail: f64 = u[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
            u[0] - tail
        }
    }
}

/// Adds `alpha * e` to the block (e is the cone identity).
pub fn add_identity(block: &ConeBlock, u: &mut [f64], alpha: f64) {
    match *block {
        ConeBlock::NonNeg { start, dim } => {
            for v in &mut u[start..start + dim] {
                *v += alpha;
            }
        }
        ConeBlock::SecondOrder { start, .. } => u[start] += alpha,
    }
}

/// Computes the NT scaling for a block at strictly interior (s, z).
pub fn nt_scaling(block: &ConeBlock, s: &[f64], z: &[f64]) -> BlockScaling {
    let r = block.range();
    let (s, z) = (&s[r.clone()], &z[r]);
    match block {
        ConeBlock::NonNeg { .. } => {
            BlockScaling::NonNeg(s.iter().zip(z).map(|(a, b)| (a / b).sqrt()).collect())
        }
        ConeBlock::SecondOrder { .. } => {
            let sres = soc_residual(s).max(f64::MIN_POSITIVE);
            let zres = soc_residual(z).max(f64::MIN_POSITIVE);
            let snorm = sres.sqrt();
            let znorm = zres.sqrt();
            let sbar: Vec<f64> = s.iter().map(|v| v / snorm).collect();
            let zbar: Vec<f64> = z.iter().map(|v| v / znorm).collect();
            let gamma = ((1.0 + dot(&sbar, &zbar)) / 2.0).sqrt();
            let mut w = Vec::with_capacity(s.len());
            w.push((sbar[0] + zbar[0]) / (2.0 * gamma));
            for i in 1..s.len() {
                w.push((sbar[i] - zbar[i]) / (2.0 * gamma));
            }
            // renormalize so that w0^2 - ||w1||^2 = 1 exactly
            let tail: f64 = w[1..].iter().map(|v| v * v).sum();
            w[0] = (1.0 + tail).sqrt();
            let eta = (sres / zres).sqrt().sqrt();
            BlockScaling::SecondOrder { eta, w }
        }
    }
}

impl BlockScaling {
    /// out = W u (W is symmetric).
    pub fn mul(&self, u: &[f64], out: &mut [f64]) {
        match self {
            BlockScaling::NonNeg(w) => {
                for i in 0..w.len() {
                    out[i] = w[i] * u[i];
                }
            }
            BlockScaling::SecondOrder { eta, w } => {
                let w1u1 = dot(&w[1..], &u[1..]);
                out[0] = eta * (w[0] * u[0] + w1u1);
                let c = u[0] + w1u1 / (1.0 + w[0]);
                for i in 1..w.len() {
                    out[i] = eta * (u[i] + c * w[i]);
                }
            }
        }
    }

    /// out = W⁻¹ u.
    pub fn mul_inv(&self, u: &[f64], out: &mut [f64]) {
        match self {
            BlockScaling::NonNeg(w) => {
                for i in 0..w.len() {
                    out[i] = u[i] / w[i];
                }
            }
            BlockScaling::SecondOrder { eta, w } => {
                let w1u1 = dot(&w[1..], &u[1..]);
                out[0] = (w[0] * u[0] - w1u1) / eta;
                let c = -u[0] + w1u1 / (1.0 + w[0]);
                for i in 1..w.len() {
                    out[i] = (u[i] + c * w[i]) / eta;
                }
            }
        }
    }

    /// Dense W² in row-major order (dim × dim). Only used for small blocks.
    pub fn squared(&self) -> Vec<f64> {
        match self {
            BlockScaling::NonNeg(w) => {
                let n = w.len();
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    m[i * n + i] = w[i] * w[i];
                }
                m
            }
            BlockScaling::SecondOrder { eta, w } => {
                // W² = eta² (2 w w' - J)
                let n = w.len();
                let e2 = eta * eta;
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        m[i * n + j] = e2 * 2.0 * w[i] * w[j];
                    }
                }
                m[0] -= e2;
                for i in 1..n {
                    m[i * n + i] += e2;
                }
                m
            }
        }
    }
}

/// Jordan product out = u ∘ v on a block.
pub fn jordan_product(block: &ConeBlock, u: &[f64], v: &[f64], out: &mut [f64]) {
    match block {
        ConeBlock::NonNeg { .. } => {
            for i in 0..u.len() {
                out[i] = u[i] * v[i];
            }
        }
        ConeBlock::SecondOrder { .. } => {
            out[0] = dot(u, v);
            for i in 1..u.len() {
                out[i] = u[0] * v[i] + v[0] * u[i];
            }
        }
    }
}

/// Solves lambda ∘ out = d on a block.
pub fn jordan_div(block: &ConeBlock, lambda: &[f64], d: &[f64], out: &mut [f64]) {
    match block {
        ConeBlock::NonNeg { .. } => {
            for i in 0..d.len() {
                out[i] = d[i] / lambda[i];
            }
        }
        ConeBlock::SecondOrder { .. } => {
            let rho = soc_residual(lambda);
            let l1d1 = dot(&lambda[1..], &d[1..]);
            let x0 = (lambda[0] * d[0] - l1d1) / rho;
            out[0] = x0;
            for i in 1..d.len() {
                out[i] = (d[i] - x0 * lambda[i]) / lambda[0];
            }
        }
    }
}

/// Largest alpha ≥ 0 (capped at `cap`) with u + alpha·du in the block.
pub fn step_to_boundary(block: &ConeBlock, u: &[f64], du: &[f64], cap: f64) -> f64 {
    match block {
        ConeBlock::NonNeg { .. } => {
            let mut a = cap;
            for i in 0..u.len() {
                if du[i] < 0.0 {
                    a = a.min(-u[i] / du[i]);
                }
            }
            a.max(0.0)
        }
        ConeBlock::SecondOrder { .. } => {
            // q(alpha) = (u0 + a d0)^2 - ||u1 + a d1||^2
            let qa = du[0] * du[0] - dot(&du[1..], &du[1..]);
            let qb = 2.0 * (u[0] * du[0] - dot(&u[1..], &du[1..]));
            let qc = soc_residual(u).max(0.0);
            let mut a = cap;
            if du[0] < 0.0 {
                a = a.min(-u[0] / du[0]);
            }
            let root = smallest_positive_root(qa, qb, qc);
            if let Some(r) = root {
                a = a.min(r);
            }
            a.max(0.0)
        }
    }
}

fn smallest_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return None;
    }
    if a.abs() <= 1e-14 * scale {
        if b < 0.0 {
            return Some(-c / b);
        }
        return None;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let mut roots = Vec::with_capacity(2);
    if q != 0.0 {
        roots.push(q / a);
        roots.push(c / q);
    } else {
        roots.push(0.0);
    }
    roots
        .into_iter()
        .filter(|r| *r > 0.0)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |v| v.min(r))))
}
