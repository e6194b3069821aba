use qcrelax_conic::{AffineExpr, ConeConstraint};
use serde::{Deserialize, Serialize};

use super::{combine, Envelope, Interval, LinearFacet};

/// Ranges of sin and cos over an angle interval inside ±90°.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigBounds {
    pub s_lo: f64,
    pub s_hi: f64,
    pub c_lo: f64,
    pub c_hi: f64,
}

impl TrigBounds {
    pub fn sin(&self) -> Interval {
        Interval::new(self.s_lo, self.s_hi)
    }

    pub fn cos(&self) -> Interval {
        Interval::new(self.c_lo, self.c_hi)
    }
}

pub fn trig_bounds(theta: Interval) -> TrigBounds {
    let (cl, ch) = (theta.lo.cos(), theta.hi.cos());
    let same_sign = theta.lo.signum() == theta.hi.signum() && theta.lo != 0.0 && theta.hi != 0.0;
    let both_zero = theta.lo == 0.0 && theta.hi == 0.0;
    TrigBounds {
        s_lo: theta.lo.sin(),
        s_hi: theta.hi.sin(),
        c_lo: cl.min(ch),
        c_hi: if same_sign || both_zero { cl.max(ch) } else { 1.0 },
    }
}

/// x̌ ≥ x² (rotated cone) and x̌ ≤ (x̄ + x̲)x − x̄x̲.
pub fn square_envelope(x: &AffineExpr, xc: &AffineExpr, b: Interval) -> Envelope {
    let upper = LinearFacet::le(combine(&[(xc, 1.0), (x, -(b.hi + b.lo))], b.hi * b.lo));
    let cone = ConeConstraint::rotated(vec![xc.clone(), AffineExpr::constant(0.5), x.clone()]);
    Envelope {
        facets: vec![upper],
        cones: vec![cone],
    }
}

/// The four McCormick inequalities for xy over bx × by, lower pair first.
pub fn mccormick(x: &AffineExpr, y: &AffineExpr, xy: &AffineExpr, bx: Interval, by: Interval) -> Vec<LinearFacet> {
    let (xl, xh, yl, yh) = (bx.lo, bx.hi, by.lo, by.hi);
    vec![
        LinearFacet::ge(combine(&[(xy, 1.0), (y, -xl), (x, -yl)], xl * yl)),
        LinearFacet::ge(combine(&[(xy, 1.0), (y, -xh), (x, -yh)], xh * yh)),
        LinearFacet::le(combine(&[(xy, 1.0), (y, -xl), (x, -yh)], xl * yh)),
        LinearFacet::le(combine(&[(xy, 1.0), (y, -xh), (x, -yl)], xh * yl)),
    ]
}

/// Secant slope of f over [lo, hi]; the derivative when the box collapses.
fn chord_slope(f: fn(f64) -> f64, df: fn(f64) -> f64, b: Interval) -> f64 {
    if b.hi - b.lo > 1e-12 {
        (f(b.lo) - f(b.hi)) / (b.lo - b.hi)
    } else {
        df(b.lo)
    }
}

/// Tangents at ±x^m/2, plus the chord on the side where sin is
/// one-signed over the box.
pub fn sin_envelope(theta: &AffineExpr, s: &AffineExpr, b: Interval) -> Vec<LinearFacet> {
    let half = 0.5 * b.abs_max();
    let (ch, sh) = (half.cos(), half.sin());
    let mut out = vec![
        LinearFacet::le(combine(&[(s, 1.0), (theta, -ch)], ch * half - sh)),
        LinearFacet::ge(combine(&[(s, 1.0), (theta, -ch)], -ch * half + sh)),
    ];
    if b.lo >= 0.0 || b.hi <= 0.0 {
        let k = chord_slope(f64::sin, f64::cos, b);
        let chord = combine(&[(s, 1.0), (theta, -k)], k * b.lo - b.lo.sin());
        if b.lo >= 0.0 {
            out.push(LinearFacet::ge(chord.clone()));
        }
        if b.hi <= 0.0 {
            out.push(LinearFacet::le(chord));
        }
    }
    out
}

/// Č ≤ 1 − (1 − cos x^m)/(x^m)²·θ² as a rotated cone, and Č above the chord.
pub fn cos_envelope(theta: &AffineExpr, c: &AffineExpr, b: Interval) -> Envelope {
    let xm = b.abs_max();
    let k = chord_slope(f64::cos, |v| -v.sin(), b);
    let chord = LinearFacet::ge(combine(&[(c, 1.0), (theta, -k)], k * b.lo - b.lo.cos()));
    if xm == 0.0 {
        return Envelope {
            facets: vec![LinearFacet::eq(combine(&[(c, 1.0)], -1.0)), chord],
            cones: Vec::new(),
        };
    }
    let curv = (1.0 - xm.cos()) / (xm * xm);
    let cone = ConeConstraint::rotated(vec![
        combine(&[(c, -1.0)], 1.0),
        AffineExpr::constant(0.5 / curv),
        theta.clone(),
    ]);
    Envelope {
        facets: vec![chord],
        cones: vec![cone],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn vars() -> (AffineExpr, AffineExpr) {
        (AffineExpr::var(0), AffineExpr::var(1))
    }

    /// Range of column 1 allowed by `facets` with column 0 fixed, by
    /// scanning a fine grid.
    fn feasible_range(env: &Envelope, x0: f64, lo: f64, hi: f64) -> (f64, f64) {
        let n = 200_001;
        let mut best = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..n {
            let v = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            if env.worst_slack(&[x0, v]) >= -1e-12 {
                best = (best.0.min(v), best.1.max(v));
            }
        }
        best
    }

    #[test]
    fn square_upper_facet_value() {
        let (x, xc) = vars();
        let env = square_envelope(&x, &xc, Interval::new(1.0, 2.0));
        let f = &env.facets[0];
        assert!((f.slack(&[1.5, 2.5])).abs() < 1e-15);
        assert!(env.worst_slack(&[1.5, 2.25]) >= 0.0);
    }

    #[test]
    fn square_collapsed_box_is_exact() {
        let (x, xc) = vars();
        let env = square_envelope(&x, &xc, Interval::point(1.3));
        let (lo, hi) = feasible_range(&env, 1.3, 1.6, 1.8);
        assert!((lo - 1.69).abs() < 1e-5 && (hi - 1.69).abs() < 1e-5);
    }

    #[test]
    fn square_symmetric_box_at_zero() {
        let (x, xc) = vars();
        let env = square_envelope(&x, &xc, Interval::new(-1.0, 1.0));
        let (lo, hi) = feasible_range(&env, 0.0, -0.5, 1.5);
        assert!(lo.abs() < 1e-5 && (hi - 1.0).abs() < 1e-5);
    }

    fn mc_range(bx: Interval, by: Interval, x: f64, y: f64) -> (f64, f64) {
        let (vx, vy, vxy) = (AffineExpr::var(0), AffineExpr::var(1), AffineExpr::var(2));
        let fs = mccormick(&vx, &vy, &vxy, bx, by);
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for f in &fs {
            // facet is xy + (terms in x, y) (sense) 0
            let rest = f.expr.eval(&[x, y, 0.0]);
            match f.sense {
                qcrelax_conic::RowSense::Ge => lo = lo.max(-rest),
                qcrelax_conic::RowSense::Le => hi = hi.min(-rest),
                qcrelax_conic::RowSense::Eq => unreachable!(),
            }
        }
        (lo, hi)
    }

    #[test]
    fn mccormick_unit_box_midpoint() {
        let b = Interval::new(0.0, 1.0);
        let (lo, hi) = mc_range(b, b, 0.5, 0.5);
        assert_eq!((lo, hi), (0.0, 0.5));
    }

    #[test]
    fn mccormick_collapsed_box_is_exact_product() {
        let (lo, hi) = mc_range(Interval::point(0.7), Interval::new(-1.0, 2.0), 0.7, 1.3);
        assert!((lo - 0.91).abs() < 1e-15 && (hi - 0.91).abs() < 1e-15);
    }

    #[test]
    fn mccormick_tight_at_corners() {
        let b = Interval::new(0.9, 1.1);
        for x in [0.9, 1.1] {
            for y in [0.9, 1.1] {
                let (lo, hi) = mc_range(b, b, x, y);
                assert!((lo - x * y).abs() < 1e-15 && (hi - x * y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sin_envelope_at_zero_symmetric() {
        let (t, s) = vars();
        let fs = sin_envelope(&t, &s, Interval::new(-PI / 3.0, PI / 3.0));
        assert_eq!(fs.len(), 2);
        let expected = (PI / 6.0).sin() - (PI / 6.0).cos() * PI / 6.0;
        assert!((fs[0].slack(&[0.0, 0.0]) - expected).abs() < 1e-15);
        assert!((fs[1].slack(&[0.0, 0.0]) - expected).abs() < 1e-15);
        assert!((expected - 0.0466).abs() < 1e-4);
    }

    #[test]
    fn sin_envelope_chord_conditions() {
        let (t, s) = vars();
        let pos = sin_envelope(&t, &s, Interval::new(0.1, 0.5));
        assert_eq!(pos.len(), 3);
        assert_eq!(pos[2].sense, qcrelax_conic::RowSense::Ge);
        let neg = sin_envelope(&t, &s, Interval::new(-0.5, -0.1));
        assert_eq!(neg.len(), 3);
        assert_eq!(neg[2].sense, qcrelax_conic::RowSense::Le);
    }

    #[test]
    fn cos_envelope_at_zero() {
        let (t, c) = vars();
        let env = cos_envelope(&t, &c, Interval::new(-PI / 3.0, PI / 3.0));
        let (lo, hi) = feasible_range(&env, 0.0, 0.0, 1.5);
        assert!((lo - 0.5).abs() < 1e-5 && (hi - 1.0).abs() < 1e-5);
    }

    #[test]
    fn cos_envelope_collapsed_box_pins_value() {
        let (t, c) = vars();
        let th = 0.3;
        let env = cos_envelope(&t, &c, Interval::point(th));
        // the feasible set is a single point, too thin for a grid scan
        assert!(env.worst_slack(&[th, th.cos()]) >= -1e-12);
        assert!(env.worst_slack(&[th, th.cos() + 1e-6]) < 0.0);
        assert!(env.worst_slack(&[th, th.cos() - 1e-6]) < 0.0);
        let zero = cos_envelope(&t, &c, Interval::point(0.0));
        assert!(zero.cones.is_empty());
        assert!(zero.worst_slack(&[0.0, 1.0]).abs() < 1e-15);
    }

    #[test]
    fn cos_quadratic_facet_tight_at_endpoints() {
        let (t, c) = vars();
        let env = cos_envelope(&t, &c, Interval::new(-0.2, 0.2));
        for th in [-0.2_f64, 0.2] {
            assert!(env.cones[0].violation(&[th, th.cos()]).abs() < 1e-12);
        }
    }

    #[test]
    fn trig_bounds_rules() {
        let tb = trig_bounds(Interval::new(-PI / 6.0, PI / 6.0));
        assert!((tb.s_lo + 0.5).abs() < 1e-15 && (tb.s_hi - 0.5).abs() < 1e-15);
        assert_eq!(tb.c_hi, 1.0);
        assert!((tb.c_lo - (PI / 6.0).cos()).abs() < 1e-15);
        let tb = trig_bounds(Interval::new(PI / 6.0, PI / 3.0));
        assert_eq!(tb.c_hi, (PI / 6.0).cos());
        let tb = trig_bounds(Interval::point(0.0));
        assert_eq!((tb.s_lo, tb.s_hi, tb.c_lo, tb.c_hi), (0.0, 0.0, 1.0, 1.0));
    }
}
