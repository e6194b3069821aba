/// `a·w + b·t + c ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HalfPlane {
    fn value(&self, w: f64, t: f64) -> f64 {
        self.a * w + self.b * t + self.c
    }

    fn scale(&self) -> f64 {
        1.0 + self.a.abs().max(self.b.abs()).max(self.c.abs())
    }
}

/// Exact range of t over the polygon cut out by `planes`, by enumerating
/// every pairwise vertex. `None` when no vertex is feasible within `tol`
/// (empty or unbounded polygon).
pub fn t_range(planes: &[HalfPlane], tol: f64) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for (i, p) in planes.iter().enumerate() {
        for q in &planes[i + 1..] {
            let det = p.a * q.b - p.b * q.a;
            if det.abs() < 1e-14 * p.scale() * q.scale() {
                continue;
            }
            let w = (-p.c * q.b + p.b * q.c) / det;
            let t = (-p.a * q.c + p.c * q.a) / det;
            if planes.iter().all(|h| h.value(w, t) >= -tol * h.scale()) {
                best = Some(match best {
                    None => (t, t),
                    Some((lo, hi)) => (lo.min(t), hi.max(t)),
                });
            }
        }
    }
    best
}
