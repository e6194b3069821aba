//! Convex envelopes of t = x·y·z with x, y > 0 (voltage magnitudes) and z a
//! cosine or sine dummy.
//!
//! The facet table follows Meyer and Floudas, restricted to the seven sign
//! regimes that arise here. With a = x̲, A = x̄, b = y̲, B = ȳ, c = z̲, C = z̄
//! every facet reads `t (≤|≥) αx + βy + γz + δ`.

use std::fmt;

use qcrelax_conic::AffineExpr;
use serde::{Deserialize, Serialize};

use super::{combine, mccormick, EnvelopeError, Interval, LinearFacet};

const DIV_GUARD: f64 = 1e-12;
const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MfCase {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
}

impl MfCase {
    pub const ALL: [MfCase; 7] = [MfCase::I, MfCase::II, MfCase::III, MfCase::IV, MfCase::V, MfCase::VI, MfCase::VII];

    pub fn side(self) -> Side {
        match self {
            MfCase::I | MfCase::III | MfCase::VI => Side::Lower,
            _ => Side::Upper,
        }
    }
}

impl fmt::Display for MfCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Cos,
    Sin,
}

/// One trilinear product t = x·y·z, with w standing for the bilinear x·y
/// (used by nested McCormick and by the fallback side).
#[derive(Debug, Clone)]
pub struct TrilinearTerm {
    pub x: AffineExpr,
    pub y: AffineExpr,
    pub w: AffineExpr,
    pub z: AffineExpr,
    pub t: AffineExpr,
    pub bx: Interval,
    pub by: Interval,
    pub bz: Interval,
    pub kind: TrigKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrilinearEnvelope {
    #[serde(skip)]
    pub facets: Vec<LinearFacet>,
    /// Cases whose header conditions held.
    pub cases: Vec<MfCase>,
    pub lower_fallback: bool,
    pub upper_fallback: bool,
}

/// t (sense) αx + βy + γz + δ, before mapping onto program columns.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Facet3 {
    side: Side,
    k: [f64; 4],
}

impl Facet3 {
    fn lower(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        Facet3 {
            side: Side::Lower,
            k: [alpha, beta, gamma, delta],
        }
    }

    fn upper(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        Facet3 {
            side: Side::Upper,
            k: [alpha, beta, gamma, delta],
        }
    }

    fn same_as(&self, o: &Facet3) -> bool {
        self.side == o.side && self.k.iter().zip(&o.k).all(|(a, b)| (a - b).abs() <= DEDUP_TOL * (1.0 + a.abs()))
    }

    fn to_linear(self, term: &TrilinearTerm) -> LinearFacet {
        let [al, be, ga, de] = self.k;
        let e = combine(&[(&term.t, 1.0), (&term.x, -al), (&term.y, -be), (&term.z, -ga)], -de);
        match self.side {
            Side::Lower => LinearFacet::ge(e),
            Side::Upper => LinearFacet::le(e),
        }
    }
}

#[derive(Clone, Copy)]
struct Box3 {
    a: f64,
    aa: f64,
    b: f64,
    bb: f64,
    c: f64,
    cc: f64,
}

impl Box3 {
    fn holds(&self, case: MfCase) -> bool {
        let Box3 { a, aa, b, bb, c, cc } = *self;
        match case {
            MfCase::I => cc <= 0.0,
            MfCase::II => c >= 0.0,
            MfCase::III => {
                c >= 0.0 && aa * b * c + a * bb * cc <= a * bb * c + aa * b * cc && aa * b * c + a * bb * cc <= aa * bb * c + a * b * cc
            }
            MfCase::IV => {
                cc <= 0.0 && a * b * c + aa * bb * cc >= aa * b * c + a * bb * cc && a * b * c + aa * bb * cc >= a * bb * c + aa * b * cc
            }
            MfCase::V => {
                cc <= 0.0
                    && aa * b * c + a * bb * cc >= a * bb * c + aa * b * cc
                    && a * b * c + aa * bb * cc < aa * b * c + a * bb * cc
                    && a * b * c + aa * bb * cc < a * bb * c + aa * b * cc
            }
            MfCase::VI | MfCase::VII => c <= 0.0 && 0.0 <= cc,
        }
    }

    /// Exact relation for the side when one coordinate is (numerically)
    /// fixed: the product of the fixed value with McCormick of the other two.
    fn collapsed(&self, side: Side, axis: usize) -> Vec<Facet3> {
        let Box3 { a, aa, b, bb, c, cc } = *self;
        // (fixed value, p-range, q-range, coefficient slots of p and q)
        let (v, (pl, ph), (ql, qh), (ip, iq)) = match axis {
            0 => (a, (b, bb), (c, cc), (1, 2)),
            1 => (b, (a, aa), (c, cc), (0, 2)),
            _ => (c, (a, aa), (b, bb), (0, 1)),
        };
        // lower McCormick of p·q when (side is lower) == (v ≥ 0)
        let use_lower = (side == Side::Lower) == (v >= 0.0);
        let pairs = if use_lower {
            [(pl, ql), (ph, qh)]
        } else {
            [(pl, qh), (ph, ql)]
        };
        pairs
            .iter()
            .map(|&(pp, qq)| {
                // p·q ≈ qq·p + pp·q − pp·qq
                let mut k = [0.0; 4];
                k[ip] = v * qq;
                k[iq] = v * pp;
                k[3] = -v * pp * qq;
                Facet3 { side, k }
            })
            .collect()
    }

    fn facets(&self, case: MfCase) -> Vec<Facet3> {
        let Box3 { a, aa, b, bb, c, cc } = *self;
        let lo = Facet3::lower;
        let up = Facet3::upper;
        match case {
            MfCase::I => vec![
                lo(bb * c, a * c, a * b, -a * bb * c - a * b * c),
                lo(bb * c, a * cc, a * bb, -a * bb * c - a * bb * cc),
                lo(b * cc, aa * c, aa * b, -aa * b * cc - aa * b * c),
                lo(b * cc, aa * cc, aa * bb, -aa * b * cc - aa * bb * cc),
                lo(b * c, aa * c, a * b, -aa * b * c - a * b * c),
                lo(bb * cc, a * cc, aa * bb, -aa * bb * cc - a * bb * cc),
            ],
            MfCase::II => vec![
                up(b * c, aa * c, aa * bb, -aa * bb * c - aa * b * c),
                up(bb * c, a * c, aa * bb, -aa * bb * c - a * bb * c),
                up(b * c, aa * cc, aa * b, -aa * b * cc - aa * b * c),
                up(bb * cc, a * c, a * bb, -a * bb * cc - a * bb * c),
                up(b * cc, aa * cc, a * b, -aa * b * cc - a * b * cc),
                up(bb * cc, a * cc, a * b, -a * bb * cc - a * b * cc),
            ],
            MfCase::III => {
                let mut out = vec![
                    lo(b * c, a * c, a * b, -2.0 * a * b * c),
                    lo(bb * cc, aa * cc, aa * bb, -2.0 * aa * bb * cc),
                    lo(b * cc, a * cc, aa * b, -a * b * cc - aa * b * cc),
                    lo(bb * c, aa * c, a * bb, -aa * bb * c - a * bb * c),
                ];
                let d = aa - a;
                if d < DIV_GUARD {
                    out.extend(self.collapsed(Side::Lower, 0));
                } else {
                    let l3 = aa * bb * c - a * bb * cc - aa * b * c + aa * b * cc;
                    let g3 = a * b * cc - aa * b * c - a * bb * cc + a * bb * c;
                    out.push(lo(l3 / d, aa * c, aa * b, -l3 * a / d - aa * bb * c - aa * b * cc + a * bb * cc));
                    out.push(lo(-g3 / d, a * cc, a * bb, g3 * aa / d - a * b * cc - a * bb * c + aa * b * c));
                }
                out
            }
            MfCase::IV => {
                let mut out = vec![
                    up(b * cc, a * cc, a * b, -2.0 * a * b * cc),
                    up(bb * c, aa * c, aa * bb, -2.0 * aa * bb * c),
                    up(b * c, aa * cc, aa * b, -aa * b * cc - aa * b * c),
                    up(bb * cc, a * c, a * bb, -a * bb * cc - a * bb * c),
                ];
                let d = cc - c;
                if d < DIV_GUARD {
                    out.extend(self.collapsed(Side::Upper, 2));
                } else {
                    let l4 = aa * b * c - aa * bb * cc - a * b * c + a * bb * c;
                    let g4 = aa * b * cc - a * b * c - aa * bb * cc + a * bb * cc;
                    out.push(up(b * c, a * c, -l4 / d, l4 * cc / d - aa * b * c - a * bb * c + aa * bb * cc));
                    out.push(up(bb * cc, aa * cc, g4 / d, -g4 * c / d - aa * b * cc - a * bb * cc + a * b * c));
                }
                out
            }
            MfCase::V => {
                let mut out = vec![
                    up(b * cc, a * cc, a * b, -2.0 * a * b * cc),
                    up(bb * c, aa * c, aa * bb, -2.0 * aa * bb * c),
                    up(b * c, a * c, a * bb, -a * b * c - a * bb * c),
                    up(bb * cc, aa * cc, aa * b, -aa * b * cc - aa * bb * cc),
                ];
                let d = bb - b;
                if d < DIV_GUARD {
                    out.extend(self.collapsed(Side::Upper, 1));
                } else {
                    let l5 = a * b * c - a * bb * cc - aa * b * c + aa * b * cc;
                    let g5 = a * bb * c - aa * b * c - a * bb * cc + aa * bb * cc;
                    out.push(up(b * c, -l5 / d, aa * b, l5 * bb / d - a * b * c - aa * b * cc + a * bb * cc));
                    out.push(up(bb * cc, g5 / d, a * bb, -g5 * b / d - a * bb * c - aa * bb * cc + aa * b * c));
                }
                out
            }
            MfCase::VI => {
                let mut out = vec![
                    lo(bb * cc, aa * cc, aa * bb, -2.0 * aa * bb * cc),
                    lo(bb * c, a * cc, a * bb, -a * bb * c - a * bb * cc),
                    lo(bb * c, a * c, a * b, -a * bb * c - a * b * c),
                    lo(b * cc, aa * c, aa * b, -aa * b * cc - aa * b * c),
                    lo(b * c, aa * c, a * b, -aa * b * c - a * b * c),
                ];
                let d = cc - c;
                if d < DIV_GUARD {
                    out.extend(self.collapsed(Side::Lower, 2));
                } else {
                    let l6 = a * bb * cc - aa * bb * c - a * b * cc + aa * b * cc;
                    out.push(lo(b * cc, a * cc, l6 / d, -l6 * c / d - a * bb * cc - aa * b * cc + aa * bb * c));
                }
                out
            }
            MfCase::VII => {
                let mut out = vec![
                    up(bb * c, aa * c, aa * bb, -2.0 * aa * bb * c),
                    up(b * c, aa * cc, aa * b, -aa * b * cc - aa * b * c),
                    up(bb * cc, a * cc, a * b, -a * bb * cc - a * b * cc),
                    up(bb * cc, a * c, a * bb, -a * bb * cc - a * bb * c),
                    up(b * cc, aa * cc, a * b, -aa * b * cc - a * b * cc),
                ];
                let d = cc - c;
                if d < DIV_GUARD {
                    out.extend(self.collapsed(Side::Upper, 2));
                } else {
                    let l7 = aa * b * c - aa * bb * cc - a * b * c + a * bb * c;
                    out.push(up(b * c, a * c, -l7 / d, l7 * cc / d - aa * b * c - a * bb * c + aa * bb * cc));
                }
                out
            }
        }
    }
}

/// Nested McCormick: McCormick of w·z with w ∈ bx·by. The McCormick of x·y
/// that defines w is emitted by the caller.
pub fn nested_mccormick(term: &TrilinearTerm) -> TrilinearEnvelope {
    let bw = term.bx.mul(&term.by);
    TrilinearEnvelope {
        facets: mccormick(&term.w, &term.z, &term.t, bw, term.bz),
        cases: Vec::new(),
        lower_fallback: false,
        upper_fallback: false,
    }
}

/// Union of the facets of every applicable case, deduplicated. A side that
/// no case covers is completed with the nested McCormick facets of that side.
pub fn mf_trilinear(term: &TrilinearTerm) -> Result<TrilinearEnvelope, EnvelopeError> {
    if !(term.bx.lo > 0.0 && term.by.lo > 0.0) {
        return Err(EnvelopeError::Domain(term.bx.lo, term.by.lo));
    }
    let bx = Box3 {
        a: term.bx.lo,
        aa: term.bx.hi,
        b: term.by.lo,
        bb: term.by.hi,
        c: term.bz.lo,
        cc: term.bz.hi,
    };
    let candidates: &[MfCase] = match term.kind {
        TrigKind::Cos => &[MfCase::II, MfCase::III],
        TrigKind::Sin => &MfCase::ALL,
    };
    let cases: Vec<MfCase> = candidates.iter().copied().filter(|&c| bx.holds(c)).collect();
    let mut raw: Vec<Facet3> = Vec::new();
    for &case in &cases {
        for f in bx.facets(case) {
            if !raw.iter().any(|g| g.same_as(&f)) {
                raw.push(f);
            }
        }
    }
    let has = |side| raw.iter().any(|f| f.side == side);
    let lower_fallback = !has(Side::Lower);
    let upper_fallback = !has(Side::Upper);
    let mut facets: Vec<LinearFacet> = raw.into_iter().map(|f| f.to_linear(term)).collect();
    if lower_fallback || upper_fallback {
        let nested = nested_mccormick(term).facets;
        // mccormick() lists the two lower facets first
        if lower_fallback {
            facets.extend_from_slice(&nested[..2]);
        }
        if upper_fallback {
            facets.extend_from_slice(&nested[2..]);
        }
    }
    Ok(TrilinearEnvelope {
        facets,
        cases,
        lower_fallback,
        upper_fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(bx: (f64, f64), by: (f64, f64), bz: (f64, f64), kind: TrigKind) -> TrilinearTerm {
        TrilinearTerm {
            x: AffineExpr::var(0),
            y: AffineExpr::var(1),
            w: AffineExpr::var(2),
            z: AffineExpr::var(3),
            t: AffineExpr::var(4),
            bx: Interval::new(bx.0, bx.1),
            by: Interval::new(by.0, by.1),
            bz: Interval::new(bz.0, bz.1),
            kind,
        }
    }

    fn vertices(t: &TrilinearTerm) -> Vec<[f64; 5]> {
        let mut out = Vec::new();
        for x in [t.bx.lo, t.bx.hi] {
            for y in [t.by.lo, t.by.hi] {
                for z in [t.bz.lo, t.bz.hi] {
                    out.push([x, y, x * y, z, x * y * z]);
                }
            }
        }
        out
    }

    fn assert_tight_at_vertices(t: &TrilinearTerm, env: &TrilinearEnvelope) {
        for v in vertices(t) {
            let mut lower = f64::INFINITY;
            let mut upper = f64::INFINITY;
            for f in &env.facets {
                let s = f.slack(&v);
                assert!(s >= -1e-12, "facet violated at vertex {v:?}: {s}");
                match f.sense {
                    qcrelax_conic::RowSense::Ge => lower = lower.min(s),
                    _ => upper = upper.min(s),
                }
            }
            assert!(lower <= 1e-12 && upper <= 1e-12, "not tight at {v:?}: {lower} {upper}");
        }
    }

    #[test]
    fn positive_sine_uses_case_two_and_is_tight() {
        let t = term((0.9, 1.1), (0.9, 1.1), (0.1, 0.5), TrigKind::Sin);
        let env = mf_trilinear(&t).unwrap();
        assert!(env.cases.contains(&MfCase::II));
        assert_tight_at_vertices(&t, &env);
    }

    #[test]
    fn negative_sine_uses_case_one() {
        let t = term((0.9, 1.1), (0.9, 1.1), (-0.5, -0.1), TrigKind::Sin);
        let env = mf_trilinear(&t).unwrap();
        assert!(env.cases.contains(&MfCase::I));
        assert!(env.cases.iter().all(|c| matches!(c, MfCase::I | MfCase::IV | MfCase::V)));
        assert_tight_at_vertices(&t, &env);
    }

    #[test]
    fn mixed_sine_uses_cases_six_and_seven() {
        let t = term((0.9, 1.1), (0.9, 1.1), (-0.3, 0.3), TrigKind::Sin);
        let env = mf_trilinear(&t).unwrap();
        assert_eq!(env.cases, vec![MfCase::VI, MfCase::VII]);
        assert!(!env.lower_fallback && !env.upper_fallback);
        assert_tight_at_vertices(&t, &env);
    }

    #[test]
    fn cosine_consults_only_two_and_three() {
        let t = term((0.9, 1.1), (0.95, 1.05), (0.5, 1.0), TrigKind::Cos);
        let env = mf_trilinear(&t).unwrap();
        assert!(env.cases.iter().all(|c| matches!(c, MfCase::II | MfCase::III)));
        assert_tight_at_vertices(&t, &env);
    }

    #[test]
    fn nonpositive_voltage_bound_is_a_domain_error() {
        let t = term((0.0, 1.1), (0.9, 1.1), (0.1, 0.5), TrigKind::Sin);
        assert!(matches!(mf_trilinear(&t), Err(EnvelopeError::Domain(..))));
    }

    #[test]
    fn collapsed_boxes_stay_valid() {
        for (bx, by, bz) in [
            ((1.0, 1.0), (0.9, 1.1), (0.1, 0.5)),
            ((0.9, 1.1), (1.0, 1.0), (-0.5, -0.1)),
            ((0.9, 1.1), (0.9, 1.1), (0.2, 0.2)),
            ((0.9, 1.1), (0.9, 1.1), (-0.2, -0.2)),
            ((0.9, 1.1), (0.9, 1.1), (0.0, 0.0)),
        ] {
            let t = term(bx, by, bz, TrigKind::Sin);
            let env = mf_trilinear(&t).unwrap();
            assert_tight_at_vertices(&t, &env);
        }
    }

    #[test]
    fn duplicate_facets_are_removed() {
        // z̲ = 0 makes Cases II, III, VI and VII all applicable
        let t = term((0.9, 1.1), (0.9, 1.1), (0.0, 0.4), TrigKind::Sin);
        let env = mf_trilinear(&t).unwrap();
        for (i, f) in env.facets.iter().enumerate() {
            for g in &env.facets[i + 1..] {
                assert_ne!(f, g);
            }
        }
    }
}
