use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::QcError;
use crate::envelopes::{trig_bounds, Interval};
use crate::netdata::Network;

/// An unordered bus pair joined by one or more branches, oriented l → m by
/// the first branch that names it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub l: usize,
    pub m: usize,
    /// Branch positions joining the pair.
    pub branches: Vec<usize>,
}

impl Link {
    /// +1 when branch `(f, t)` runs l → m, −1 when it runs m → l.
    pub fn orientation(&self, f: usize) -> f64 {
        if f == self.l {
            1.0
        } else {
            -1.0
        }
    }
}

/// Groups branches by unordered bus pair, in order of first appearance.
pub fn links(network: &Network) -> Result<Vec<Link>, QcError> {
    let ends = network.branch_ends()?;
    let mut by_pair: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut out: Vec<Link> = Vec::new();
    for (k, &(f, t)) in ends.iter().enumerate() {
        let key = (f.min(t), f.max(t));
        match by_pair.get(&key) {
            Some(&j) => out[j].branches.push(k),
            None => {
                by_pair.insert(key, out.len());
                out.push(Link {
                    l: f,
                    m: t,
                    branches: vec![k],
                });
            }
        }
    }
    Ok(out)
}

/// Boxes on the voltage magnitudes (per bus), the angle differences
/// θ_l − θ_m and the magnitude differences V_l − V_m (per link).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub v: Vec<Interval>,
    pub theta: Vec<Interval>,
    pub vdiff: Vec<Interval>,
}

impl BoundSet {
    /// Bounds straight from the data; angle limits of parallel branches are
    /// intersected, and V_l − V_m starts at [V̲_l − V̄_m, V̄_l − V̲_m].
    pub fn initial(network: &Network) -> Result<BoundSet, QcError> {
        let links = links(network)?;
        let v: Vec<Interval> = network
            .buses
            .iter()
            .map(|b| {
                if b.v_min <= b.v_max {
                    Ok(Interval::new(b.v_min, b.v_max))
                } else {
                    Err(QcError::Bounds(format!("bus {}: v_min exceeds v_max", b.id)))
                }
            })
            .collect::<Result<_, _>>()?;
        let ends = network.branch_ends()?;
        let mut theta = Vec::with_capacity(links.len());
        for link in &links {
            let mut acc = Interval::new(-FRAC_PI_2, FRAC_PI_2);
            for &k in &link.branches {
                let br = &network.branches[k];
                if br.theta_min > br.theta_max {
                    return Err(QcError::Bounds(format!("branch {}: theta_min exceeds theta_max", br.id)));
                }
                let own = Interval::new(br.theta_min, br.theta_max);
                let own = if link.orientation(ends[k].0) > 0.0 { own } else { own.neg() };
                acc = acc.intersect(&own).ok_or_else(|| {
                    QcError::Bounds(format!("branch {}: parallel angle limits do not intersect", br.id))
                })?;
            }
            theta.push(acc);
        }
        let vdiff = links.iter().map(|lk| v[lk.l].sub(&v[lk.m])).collect();
        Ok(BoundSet { v, theta, vdiff })
    }

    /// Range of V_l − V_m implied by the magnitude boxes.
    pub fn vdiff_envelope(&self, link: &Link) -> Interval {
        self.v[link.l].sub(&self.v[link.m])
    }

    /// Shrinks every magnitude-difference box to the range implied by the
    /// current magnitude boxes.
    pub fn sync_vdiff(&mut self, links: &[Link]) {
        for (k, lk) in links.iter().enumerate() {
            let env = self.v[lk.l].sub(&self.v[lk.m]);
            self.vdiff[k] = match self.vdiff[k].intersect(&env) {
                Some(iv) => iv,
                // numerically touching boxes: keep the closest point
                None => Interval::point(if self.vdiff[k].lo > env.hi { env.hi } else { env.lo }),
            };
        }
    }

    /// Checks the preconditions the model builder relies on.
    pub fn check(&self, network: &Network, links: &[Link]) -> Result<(), QcError> {
        if self.v.len() != network.buses.len() || self.theta.len() != links.len() || self.vdiff.len() != links.len() {
            return Err(QcError::Bounds("bound set does not match the network".into()));
        }
        for (i, iv) in self.v.iter().enumerate() {
            if !(iv.lo > 0.0 && iv.lo <= iv.hi && iv.hi.is_finite()) {
                return Err(QcError::Bounds(format!("bus {}: voltage box [{}, {}]", network.buses[i].id, iv.lo, iv.hi)));
            }
        }
        for (k, lk) in links.iter().enumerate() {
            let name = || {
                let br = &network.branches[lk.branches[0]];
                format!("branch {} ({} -> {})", br.id, br.from_bus, br.to_bus)
            };
            let th = self.theta[k];
            if !(th.lo > -FRAC_PI_2 && th.lo <= th.hi && th.hi < FRAC_PI_2) {
                return Err(QcError::Bounds(format!("{}: angle box [{}, {}]", name(), th.lo, th.hi)));
            }
            let vd = self.vdiff[k];
            let env = self.vdiff_envelope(lk);
            if !(vd.lo <= vd.hi && vd.lo >= env.lo - 1e-12 && vd.hi <= env.hi + 1e-12) {
                return Err(QcError::Bounds(format!(
                    "{}: difference box [{}, {}] outside [{}, {}]",
                    name(),
                    vd.lo,
                    vd.hi,
                    env.lo,
                    env.hi
                )));
            }
        }
        Ok(())
    }

    /// Every box of `self` lies inside the matching box of `outer`.
    pub fn is_subset_of(&self, outer: &BoundSet) -> bool {
        let sub = |a: &[Interval], b: &[Interval]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.is_subset_of(y));
        sub(&self.v, &outer.v) && sub(&self.theta, &outer.theta) && sub(&self.vdiff, &outer.vdiff)
    }
}

/// Boxes on the lifted variables implied by a BoundSet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedBounds {
    /// w_ii per bus.
    pub w: Vec<Interval>,
    /// Per link from here on.
    pub w_link: Vec<Interval>,
    pub cos: Vec<Interval>,
    pub sin: Vec<Interval>,
    pub c: Vec<Interval>,
    pub s: Vec<Interval>,
    pub wdiff: Vec<Interval>,
    pub what_l: Vec<Interval>,
    pub what_m: Vec<Interval>,
}

pub fn derive_lifted_bounds(bounds: &BoundSet, links: &[Link]) -> LiftedBounds {
    let w = bounds.v.iter().map(|v| v.square()).collect();
    let mut out = LiftedBounds {
        w,
        w_link: Vec::new(),
        cos: Vec::new(),
        sin: Vec::new(),
        c: Vec::new(),
        s: Vec::new(),
        wdiff: Vec::new(),
        what_l: Vec::new(),
        what_m: Vec::new(),
    };
    for (k, lk) in links.iter().enumerate() {
        let (vl, vm) = (bounds.v[lk.l], bounds.v[lk.m]);
        let wl = vl.mul(&vm);
        let tb = trig_bounds(bounds.theta[k]);
        let vd = bounds.vdiff[k];
        out.c.push(wl.mul(&tb.cos()));
        out.s.push(wl.mul(&tb.sin()));
        out.w_link.push(wl);
        out.cos.push(tb.cos());
        out.sin.push(tb.sin());
        out.wdiff.push(vd.square());
        out.what_l.push(vd.mul(&vl));
        out.what_m.push(vd.mul(&vm));
    }
    out
}
