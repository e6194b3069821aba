use std::f64::consts::PI;

use qcrelax_conic::{AffineExpr, RowSense};
use qcrelax_core::envelopes::{
    cos_envelope, mccormick, mf_trilinear, nested_mccormick, sin_envelope, square_envelope, trig_bounds, Envelope,
    EnvelopeError, Interval, LinearFacet, MfCase, TrigKind, TrilinearEnvelope, TrilinearTerm,
};
use rand::Rng;

use crate::plane::{t_range, HalfPlane};

/// Box of a trilinear product t = x·y·z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrilinearBox {
    pub x: Interval,
    pub y: Interval,
    pub z: Interval,
    pub kind: TrigKind,
}

impl TrilinearBox {
    pub fn vertices(&self) -> [[f64; 3]; 8] {
        let mut out = [[0.0; 3]; 8];
        for (k, v) in out.iter_mut().enumerate() {
            let pick = |i: Interval, bit: usize| if k >> bit & 1 == 0 { i.lo } else { i.hi };
            *v = [pick(self.x, 0), pick(self.y, 1), pick(self.z, 2)];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleKind {
    Square(Interval),
    Bilinear(Interval, Interval),
    Sin(Interval),
    Cos(Interval),
    Trilinear { domain: TrilinearBox, mf: bool },
}

/// Column layout of trilinear terms: x, y, w = x·y, z, t.
fn term(b: &TrilinearBox) -> TrilinearTerm {
    TrilinearTerm {
        x: AffineExpr::var(0),
        y: AffineExpr::var(1),
        w: AffineExpr::var(2),
        z: AffineExpr::var(3),
        t: AffineExpr::var(4),
        bx: b.x,
        by: b.y,
        bz: b.z,
        kind: b.kind,
    }
}

/// The trilinear relaxation over columns (x, y, w, z, t), with the McCormick
/// facets defining w prepended as the model builder emits them.
pub fn trilinear_envelope(b: &TrilinearBox, mf: bool) -> Result<TrilinearEnvelope, EnvelopeError> {
    let tm = term(b);
    let mut env = if mf { mf_trilinear(&tm)? } else { nested_mccormick(&tm) };
    let mut facets = mccormick(&tm.x, &tm.y, &tm.w, b.x, b.y);
    facets.append(&mut env.facets);
    env.facets = facets;
    Ok(env)
}

/// Exact range of t allowed by `facets` at fixed (x, y, z), over all w.
pub fn trilinear_range(facets: &[LinearFacet], x: f64, y: f64, z: f64) -> Option<(f64, f64)> {
    let mut planes = Vec::with_capacity(2 * facets.len());
    for f in facets {
        let e0 = f.expr.eval(&[x, y, 0.0, z, 0.0]);
        let a = f.expr.eval(&[x, y, 1.0, z, 0.0]) - e0;
        let b = f.expr.eval(&[x, y, 0.0, z, 1.0]) - e0;
        let ge = HalfPlane { a, b, c: e0 };
        let le = HalfPlane { a: -a, b: -b, c: -e0 };
        match f.sense {
            RowSense::Ge => planes.push(ge),
            RowSense::Le => planes.push(le),
            RowSense::Eq => planes.extend([ge, le]),
        }
    }
    t_range(&planes, 1e-12)
}

/// `n` evenly spaced points spanning `i`, or its single point when collapsed.
fn grid(i: Interval, n: usize) -> Vec<f64> {
    if i.width() == 0.0 || n < 2 {
        return vec![i.lo];
    }
    (0..n).map(|k| i.lo + i.width() * k as f64 / (n - 1) as f64).collect()
}

/// Worst signed slack of the envelope's relations over a grid of `density`
/// points per axis, evaluated on the graph of the true function. Negative
/// values are containment violations.
pub fn envelope_oracle(kind: &OracleKind, density: usize) -> Result<f64, EnvelopeError> {
    let (v0, v1) = (AffineExpr::var(0), AffineExpr::var(1));
    let mut worst = f64::INFINITY;
    match *kind {
        OracleKind::Square(b) => {
            let env = square_envelope(&v0, &v1, b);
            for x in grid(b, density) {
                worst = worst.min(env.worst_slack(&[x, x * x]));
            }
        }
        OracleKind::Bilinear(bx, by) => {
            let env = Envelope {
                facets: mccormick(&v0, &v1, &AffineExpr::var(2), bx, by),
                cones: Vec::new(),
            };
            for x in grid(bx, density) {
                for y in grid(by, density) {
                    worst = worst.min(env.worst_slack(&[x, y, x * y]));
                }
            }
        }
        OracleKind::Sin(b) => {
            let env = Envelope {
                facets: sin_envelope(&v0, &v1, b),
                cones: Vec::new(),
            };
            for th in grid(b, density) {
                worst = worst.min(env.worst_slack(&[th, th.sin()]));
            }
        }
        OracleKind::Cos(b) => {
            let env = cos_envelope(&v0, &v1, b);
            for th in grid(b, density) {
                worst = worst.min(env.worst_slack(&[th, th.cos()]));
            }
        }
        OracleKind::Trilinear { domain, mf } => {
            let env = trilinear_envelope(&domain, mf)?;
            for x in grid(domain.x, density) {
                for y in grid(domain.y, density) {
                    for z in grid(domain.z, density) {
                        let p = [x, y, x * y, z, x * y * z];
                        worst = env.facets.iter().map(|f| f.slack(&p)).fold(worst, f64::min);
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn voltage_box<R: Rng>(rng: &mut R) -> Interval {
    let lo = rng.gen_range(0.85..1.05);
    let width = if rng.gen_bool(0.05) { 0.0 } else { rng.gen_range(0.0..0.25) };
    Interval::new(lo, lo + width)
}

/// Random box on which `case` applies, for a cosine or sine product.
/// Cosine boxes come from random angle boxes inside ±60°.
///
/// # Panics
/// For a cosine product with a case other than II or III, or if no box is
/// found after many draws.
pub fn random_trilinear_box<R: Rng>(case: MfCase, kind: TrigKind, rng: &mut R) -> TrilinearBox {
    if kind == TrigKind::Cos {
        assert!(matches!(case, MfCase::II | MfCase::III), "cosine products only reach cases II and III");
    }
    for _ in 0..100_000 {
        let z = match (kind, case) {
            (TrigKind::Cos, _) => {
                let a = rng.gen_range(-PI / 3.0..PI / 3.0);
                let b = rng.gen_range(-PI / 3.0..PI / 3.0);
                trig_bounds(Interval::new(a.min(b), a.max(b))).cos()
            }
            (_, MfCase::I | MfCase::IV | MfCase::V) => {
                let hi = if rng.gen_bool(0.1) { 0.0 } else { -rng.gen_range(0.0..0.6) };
                Interval::new(hi - rng.gen_range(0.0..0.6), hi)
            }
            (_, MfCase::II | MfCase::III) => {
                let lo = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..0.6) };
                Interval::new(lo, lo + rng.gen_range(0.0..0.6))
            }
            (_, MfCase::VI | MfCase::VII) => Interval::new(-rng.gen_range(0.0..0.8), rng.gen_range(0.0..0.8)),
        };
        let domain = TrilinearBox {
            x: voltage_box(rng),
            y: voltage_box(rng),
            z,
            kind,
        };
        if mf_trilinear(&term(&domain)).map_or(false, |e| e.cases.contains(&case)) {
            return domain;
        }
    }
    panic!("no box found for case {case}");
}
