//! Exact AC power-flow evaluation and the lifting of AC points into the
//! relaxation's variable space.

use serde::{Deserialize, Serialize};

use super::build::flow_coefficients;
use super::{QcError, QcModel, VarTag};
use crate::netdata::{Branch, Network};

/// Full AC operating point: magnitudes and angles per bus, dispatch per
/// generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcPoint {
    pub vm: Vec<f64>,
    pub va: Vec<f64>,
    pub pg: Vec<f64>,
    pub qg: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchFlows {
    pub p_ft: f64,
    pub q_ft: f64,
    pub p_tf: f64,
    pub q_tf: f64,
}

pub fn branch_flows(br: &Branch, vf: f64, vt: f64, theta_ft: f64) -> BranchFlows {
    let fc = flow_coefficients(br);
    let lifted = [vf * vf, vt * vt, vf * vt * theta_ft.cos(), vf * vt * theta_ft.sin()];
    let dot = |a: [f64; 4]| a.iter().zip(&lifted).map(|(x, y)| x * y).sum::<f64>();
    BranchFlows {
        p_ft: dot(fc.p_ft),
        q_ft: dot(fc.q_ft),
        p_tf: dot(fc.p_tf),
        q_tf: dot(fc.q_tf),
    }
}

/// Largest absolute residual per constraint family; bound families report
/// the distance outside the box.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AcResidual {
    pub p_balance: f64,
    pub q_balance: f64,
    pub reference_angle: f64,
    pub pg_bounds: f64,
    pub qg_bounds: f64,
    pub v_bounds: f64,
    pub angle_diff: f64,
    pub flow_limit: f64,
    pub objective: f64,
}

impl AcResidual {
    pub fn max_violation(&self) -> f64 {
        [
            self.p_balance,
            self.q_balance,
            self.reference_angle,
            self.pg_bounds,
            self.qg_bounds,
            self.v_bounds,
            self.angle_diff,
            self.flow_limit,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn outside(v: f64, lo: f64, hi: f64) -> f64 {
    (lo - v).max(v - hi).max(0.0)
}

pub fn check_ac_point(network: &Network, point: &AcPoint) -> Result<AcResidual, QcError> {
    let ends = network.branch_ends()?;
    let gen_bus = network.generator_buses()?;
    let n = network.buses.len();
    let mut p_inj: Vec<f64> = (0..n).map(|i| -network.buses[i].p_load).collect();
    let mut q_inj: Vec<f64> = (0..n).map(|i| -network.buses[i].q_load).collect();
    let mut r = AcResidual::default();

    for (k, g) in network.generators.iter().enumerate() {
        p_inj[gen_bus[k]] += point.pg[k];
        q_inj[gen_bus[k]] += point.qg[k];
        r.pg_bounds = r.pg_bounds.max(outside(point.pg[k], g.p_min, g.p_max));
        r.qg_bounds = r.qg_bounds.max(outside(point.qg[k], g.q_min, g.q_max));
        r.objective += g.cost(point.pg[k]);
    }
    for (i, bus) in network.buses.iter().enumerate() {
        let w = point.vm[i] * point.vm[i];
        p_inj[i] -= bus.g_shunt * w;
        q_inj[i] += bus.b_shunt * w;
        r.v_bounds = r.v_bounds.max(outside(point.vm[i], bus.v_min, bus.v_max));
        if bus.is_reference {
            r.reference_angle = r.reference_angle.max(point.va[i].abs());
        }
    }
    for (k, br) in network.branches.iter().enumerate() {
        let (f, t) = ends[k];
        let dth = point.va[f] - point.va[t];
        let fl = branch_flows(br, point.vm[f], point.vm[t], dth);
        p_inj[f] -= fl.p_ft;
        q_inj[f] -= fl.q_ft;
        p_inj[t] -= fl.p_tf;
        q_inj[t] -= fl.q_tf;
        r.angle_diff = r.angle_diff.max(outside(dth, br.theta_min, br.theta_max));
        if let Some(s) = br.s_max {
            let over = |p: f64, q: f64| ((p * p + q * q).sqrt() - s).max(0.0);
            r.flow_limit = r.flow_limit.max(over(fl.p_ft, fl.q_ft)).max(over(fl.p_tf, fl.q_tf));
        }
    }
    r.p_balance = p_inj.iter().fold(0.0, |m, v| m.max(v.abs()));
    r.q_balance = q_inj.iter().fold(0.0, |m, v| m.max(v.abs()));
    Ok(r)
}

/// Image of an AC point under the lifting w = V², c = w cos θ, s = w sin θ, …
/// as a full column vector of `model`.
pub fn lift_ac_point(network: &Network, model: &QcModel, point: &AcPoint) -> Result<Vec<f64>, QcError> {
    let ends = network.branch_ends()?;
    let mut x = vec![0.0; model.program.num_vars()];
    for (&tag, &j) in &model.var_map {
        x[j] = match tag {
            VarTag::Pg(k) => point.pg[k],
            VarTag::Qg(k) => point.qg[k],
            VarTag::CostEpi(k) => network.generators[k].cost_c2 * point.pg[k] * point.pg[k],
            VarTag::Theta(i) => point.va[i],
            VarTag::V(i) => point.vm[i],
            VarTag::W(i) => point.vm[i] * point.vm[i],
            VarTag::WLink(k) | VarTag::C(k) | VarTag::S(k) | VarTag::CosDummy(k) | VarTag::SinDummy(k) => {
                let lk = &model.links[k];
                let w = point.vm[lk.l] * point.vm[lk.m];
                let th = point.va[lk.l] - point.va[lk.m];
                match tag {
                    VarTag::WLink(_) => w,
                    VarTag::C(_) => w * th.cos(),
                    VarTag::S(_) => w * th.sin(),
                    VarTag::CosDummy(_) => th.cos(),
                    _ => th.sin(),
                }
            }
            VarTag::VDiff(k) | VarTag::WDiff(k) | VarTag::WHatL(k) | VarTag::WHatM(k) => {
                let lk = &model.links[k];
                let d = point.vm[lk.l] - point.vm[lk.m];
                match tag {
                    VarTag::VDiff(_) => d,
                    VarTag::WDiff(_) => d * d,
                    VarTag::WHatL(_) => d * point.vm[lk.l],
                    _ => d * point.vm[lk.m],
                }
            }
            VarTag::Pft(k) | VarTag::Qft(k) | VarTag::Ptf(k) | VarTag::Qtf(k) => {
                let (f, t) = ends[k];
                let fl = branch_flows(&network.branches[k], point.vm[f], point.vm[t], point.va[f] - point.va[t]);
                match tag {
                    VarTag::Pft(_) => fl.p_ft,
                    VarTag::Qft(_) => fl.q_ft,
                    VarTag::Ptf(_) => fl.p_tf,
                    _ => fl.q_tf,
                }
            }
        };
    }
    Ok(x)
}
