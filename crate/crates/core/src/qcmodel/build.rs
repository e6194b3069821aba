use std::collections::BTreeMap;

use qcrelax_conic::{AffineExpr, ConeConstraint, ConicProgram, VarBounds};

use super::bounds::{derive_lifted_bounds, links};
use super::{BoundSet, QcError, QcModel, QcObjective, QcVariant, TrilinearReport, VarTag};
use crate::envelopes::{
    cos_envelope, mccormick, sin_envelope, square_envelope, Envelope, Interval, LinearFacet, TrigKind,
    TrilinearRegistry, TrilinearRelaxation, TrilinearTerm,
};
use crate::netdata::{Branch, Network};

/// Coefficients of the four terminal flows over (w_ff, w_tt, c, s_ft), where
/// c = V_f V_t cos(θ_f − θ_t) and s_ft = V_f V_t sin(θ_f − θ_t). The tap
/// ratio scales from-side terms by 1/t² and mutual terms by 1/t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowCoefficients {
    pub p_ft: [f64; 4],
    pub q_ft: [f64; 4],
    pub p_tf: [f64; 4],
    pub q_tf: [f64; 4],
}

pub fn flow_coefficients(br: &Branch) -> FlowCoefficients {
    let (g, b, t) = (br.g, br.b, br.tap);
    let bc = b + 0.5 * br.b_charge;
    FlowCoefficients {
        p_ft: [g / (t * t), 0.0, -g / t, -b / t],
        q_ft: [-bc / (t * t), 0.0, b / t, -g / t],
        p_tf: [0.0, g, -g / t, b / t],
        q_tf: [0.0, -bc, b / t, g / t],
    }
}

/// Builds the relaxation with the trilinear envelope named by the variant.
pub fn build(network: &Network, bounds: &BoundSet, variant: QcVariant) -> Result<QcModel, QcError> {
    let name = variant.relaxation_name();
    let relax = TrilinearRegistry::builtin()
        .get(name)
        .ok_or_else(|| QcError::UnknownRelaxation(name.to_string()))?;
    build_with(network, bounds, variant, relax.as_ref())
}

struct Builder {
    program: ConicProgram,
    var_map: BTreeMap<VarTag, usize>,
}

impl Builder {
    fn var(&mut self, tag: VarTag, b: VarBounds) -> usize {
        let j = self.program.add_var(tag.to_string(), b);
        self.var_map.insert(tag, j);
        j
    }

    fn boxed(&mut self, tag: VarTag, iv: Interval) -> usize {
        self.var(tag, VarBounds::new(iv.lo, iv.hi))
    }

    fn facet(&mut self, f: LinearFacet) {
        let (terms, sense, rhs) = f.into_row();
        if !terms.is_empty() {
            self.program.add_row(terms, sense, rhs);
        }
    }

    fn facets(&mut self, fs: impl IntoIterator<Item = LinearFacet>) {
        fs.into_iter().for_each(|f| self.facet(f));
    }

    fn envelope(&mut self, env: Envelope) {
        self.facets(env.facets);
        env.cones.into_iter().for_each(|c| self.program.add_cone(c));
    }

    fn eq(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        let f = LinearFacet::eq(AffineExpr::new(terms, -rhs));
        self.facet(f);
    }
}

fn v(j: usize) -> AffineExpr {
    AffineExpr::var(j)
}

/// The flow-consistency equality needs g² + b² + b·b_sh/2 safely away from
/// zero relative to |y|².
const CONSISTENCY_DENOM_TOL: f64 = 1e-9;

pub fn build_with(
    network: &Network,
    bounds: &BoundSet,
    variant: QcVariant,
    relaxation: &dyn TrilinearRelaxation,
) -> Result<QcModel, QcError> {
    let links = links(network)?;
    bounds.check(network, &links)?;
    let lifted = derive_lifted_bounds(bounds, &links);
    let ends = network.branch_ends()?;
    let gen_bus = network.generator_buses()?;
    let reference = network
        .reference_bus()
        .ok_or_else(|| QcError::Bounds("network has no reference bus".into()))?;

    let mut bld = Builder {
        program: ConicProgram::new(),
        var_map: BTreeMap::new(),
    };

    // columns
    let mut cost = AffineExpr::constant(0.0);
    for (k, g) in network.generators.iter().enumerate() {
        let pg = bld.boxed(VarTag::Pg(k), Interval::new(g.p_min, g.p_max));
        bld.boxed(VarTag::Qg(k), Interval::new(g.q_min, g.q_max));
        cost = cost.plus(&v(pg), g.cost_c1);
        cost.constant += g.cost_c0;
        if g.cost_c2 > 0.0 {
            let e = bld.var(VarTag::CostEpi(k), VarBounds::new(0.0, f64::INFINITY));
            cost = cost.plus(&v(e), 1.0);
        }
    }
    for (i, b) in bounds.v.iter().enumerate() {
        let th = if i == reference {
            VarBounds::new(0.0, 0.0)
        } else {
            VarBounds::FREE
        };
        bld.var(VarTag::Theta(i), th);
        bld.boxed(VarTag::V(i), *b);
        bld.boxed(VarTag::W(i), lifted.w[i]);
    }
    for k in 0..links.len() {
        bld.boxed(VarTag::WLink(k), lifted.w_link[k]);
        bld.boxed(VarTag::C(k), lifted.c[k]);
        bld.boxed(VarTag::S(k), lifted.s[k]);
        bld.boxed(VarTag::CosDummy(k), lifted.cos[k]);
        bld.boxed(VarTag::SinDummy(k), lifted.sin[k]);
        if variant.use_vdiff {
            bld.boxed(VarTag::VDiff(k), bounds.vdiff[k]);
            bld.boxed(VarTag::WDiff(k), lifted.wdiff[k]);
            bld.boxed(VarTag::WHatL(k), lifted.what_l[k]);
            bld.boxed(VarTag::WHatM(k), lifted.what_m[k]);
        }
    }
    for k in 0..network.branches.len() {
        for tag in [VarTag::Pft(k), VarTag::Qft(k), VarTag::Ptf(k), VarTag::Qtf(k)] {
            bld.var(tag, VarBounds::FREE);
        }
    }
    let cols = bld.var_map.clone();
    let col = |tag: VarTag| bld_col(&cols, tag);

    // generation cost epigraphs: e ≥ c2·Pg²
    for (k, g) in network.generators.iter().enumerate() {
        if g.cost_c2 > 0.0 {
            let cone = ConeConstraint::rotated(vec![
                v(col(VarTag::CostEpi(k))),
                AffineExpr::constant(0.5),
                v(col(VarTag::Pg(k))).scaled(g.cost_c2.sqrt()),
            ]);
            bld.program.add_cone(cone);
        }
    }

    // bus power balance
    for (i, bus) in network.buses.iter().enumerate() {
        let w = col(VarTag::W(i));
        let mut p: Vec<(usize, f64)> = vec![(w, -bus.g_shunt)];
        let mut q: Vec<(usize, f64)> = vec![(w, bus.b_shunt)];
        for (k, _) in gen_bus.iter().enumerate().filter(|(_, &b)| b == i) {
            p.push((col(VarTag::Pg(k)), 1.0));
            q.push((col(VarTag::Qg(k)), 1.0));
        }
        for (k, &(f, t)) in ends.iter().enumerate() {
            if f == i {
                p.push((col(VarTag::Pft(k)), -1.0));
                q.push((col(VarTag::Qft(k)), -1.0));
            }
            if t == i {
                p.push((col(VarTag::Ptf(k)), -1.0));
                q.push((col(VarTag::Qtf(k)), -1.0));
            }
        }
        bld.eq(p, bus.p_load);
        bld.eq(q, bus.q_load);
    }

    // per-link lifted relations
    let mut trilinear = Vec::new();
    for (k, lk) in links.iter().enumerate() {
        let (vl, vm) = (col(VarTag::V(lk.l)), col(VarTag::V(lk.m)));
        let (wll, wmm) = (col(VarTag::W(lk.l)), col(VarTag::W(lk.m)));
        let wlm = col(VarTag::WLink(k));
        let (c, s) = (col(VarTag::C(k)), col(VarTag::S(k)));
        let (cd, sd) = (col(VarTag::CosDummy(k)), col(VarTag::SinDummy(k)));
        let theta = AffineExpr::new(vec![(col(VarTag::Theta(lk.l)), 1.0), (col(VarTag::Theta(lk.m)), -1.0)], 0.0);
        let th_box = bounds.theta[k];
        let (bvl, bvm) = (bounds.v[lk.l], bounds.v[lk.m]);

        if th_box.lo == th_box.hi {
            bld.facet(LinearFacet::eq(theta.clone().plus(&AffineExpr::constant(th_box.lo), -1.0)));
        } else {
            bld.facet(LinearFacet::ge(theta.clone().plus(&AffineExpr::constant(th_box.lo), -1.0)));
            bld.facet(LinearFacet::le(theta.clone().plus(&AffineExpr::constant(th_box.hi), -1.0)));
        }

        bld.facets(mccormick(&v(vl), &v(vm), &v(wlm), bvl, bvm));
        bld.facets(sin_envelope(&theta, &v(sd), th_box));
        bld.envelope(cos_envelope(&theta, &v(cd), th_box));

        for (kind, dummy, prod, bz) in [
            (TrigKind::Cos, cd, c, lifted.cos[k]),
            (TrigKind::Sin, sd, s, lifted.sin[k]),
        ] {
            let term = TrilinearTerm {
                x: v(vl),
                y: v(vm),
                w: v(wlm),
                z: v(dummy),
                t: v(prod),
                bx: bvl,
                by: bvm,
                bz,
                kind,
            };
            let mut env = relaxation.relax(&term)?;
            bld.facets(std::mem::take(&mut env.facets));
            trilinear.push(TrilinearReport {
                link: k,
                kind,
                envelope: env,
            });
        }

        // c² + s² ≤ w_ll·w_mm
        bld.program.add_cone(ConeConstraint::rotated(vec![
            v(wll),
            v(wmm).scaled(0.5),
            v(c),
            v(s),
        ]));

        if variant.use_vdiff {
            let (vd, wd) = (col(VarTag::VDiff(k)), col(VarTag::WDiff(k)));
            let (hl, hm) = (col(VarTag::WHatL(k)), col(VarTag::WHatM(k)));
            let bvd = bounds.vdiff[k];
            bld.eq(vec![(vd, 1.0), (vl, -1.0), (vm, 1.0)], 0.0);
            // w_lm = (w_ll + w_mm − WΔ)/2
            bld.eq(vec![(wlm, 2.0), (wll, -1.0), (wmm, -1.0), (wd, 1.0)], 0.0);
            bld.envelope(square_envelope(&v(vd), &v(wd), bvd));
            // VΔ² ≤ w_ll − 2w_lm + w_mm
            bld.program.add_cone(ConeConstraint::rotated(vec![
                AffineExpr::new(vec![(wll, 1.0), (wlm, -2.0), (wmm, 1.0)], 0.0),
                AffineExpr::constant(0.5),
                v(vd),
            ]));
            // w_ll − w_mm = Ŵ_l + Ŵ_m
            bld.eq(vec![(wll, 1.0), (wmm, -1.0), (hl, -1.0), (hm, -1.0)], 0.0);
            bld.facets(mccormick(&v(vd), &v(vl), &v(hl), bvd, bvl));
            bld.facets(mccormick(&v(vd), &v(vm), &v(hm), bvd, bvm));
        }
    }

    // branch flows
    for (k, br) in network.branches.iter().enumerate() {
        let (f, t) = ends[k];
        let li = links
            .iter()
            .position(|lk| lk.branches.contains(&k))
            .expect("every branch belongs to a link");
        let sigma = links[li].orientation(f);
        let (wff, wtt) = (col(VarTag::W(f)), col(VarTag::W(t)));
        let (c, s) = (col(VarTag::C(li)), col(VarTag::S(li)));
        let fc = flow_coefficients(br);
        let flows = [
            (VarTag::Pft(k), fc.p_ft),
            (VarTag::Qft(k), fc.q_ft),
            (VarTag::Ptf(k), fc.p_tf),
            (VarTag::Qtf(k), fc.q_tf),
        ];
        for (tag, a) in flows {
            bld.eq(
                vec![(col(tag), 1.0), (wff, -a[0]), (wtt, -a[1]), (c, -a[2]), (s, -a[3] * sigma)],
                0.0,
            );
        }
        if let Some(smax) = br.s_max {
            for (p, q) in [(VarTag::Pft(k), VarTag::Qft(k)), (VarTag::Ptf(k), VarTag::Qtf(k))] {
                bld.program.add_cone(ConeConstraint::second_order(vec![
                    AffineExpr::constant(smax),
                    v(col(p)),
                    v(col(q)),
                ]));
            }
        }
        if variant.use_vdiff && consistency_applies(br) {
            // D·(w_ff − w_tt) = g(P_ft − P_tf) − b(Q_ft − Q_tf)
            let d = br.g * br.g + br.b * br.b + 0.5 * br.b * br.b_charge;
            bld.eq(
                vec![
                    (wff, d),
                    (wtt, -d),
                    (col(VarTag::Pft(k)), -br.g),
                    (col(VarTag::Ptf(k)), br.g),
                    (col(VarTag::Qft(k)), br.b),
                    (col(VarTag::Qtf(k)), -br.b),
                ],
                0.0,
            );
        }
    }

    // w_ii ∈ ⟨V_i²⟩
    for (i, b) in bounds.v.iter().enumerate() {
        let env = square_envelope(&v(col(VarTag::V(i))), &v(col(VarTag::W(i))), *b);
        bld.envelope(env);
    }

    let objective = match variant.objective {
        QcObjective::Cost => cost.clone(),
        QcObjective::Min(target) => target_expr(&bld.var_map, &links, target)?,
        QcObjective::Max(target) => target_expr(&bld.var_map, &links, target)?.scaled(-1.0),
    };
    let obj = crate::envelopes::normalize(objective);
    bld.program.set_objective(&obj.terms, obj.constant);

    Ok(QcModel {
        program: bld.program,
        var_map: bld.var_map,
        bounds: bounds.clone(),
        variant,
        links,
        cost,
        trilinear,
    })
}

fn bld_col(map: &BTreeMap<VarTag, usize>, tag: VarTag) -> usize {
    *map.get(&tag).unwrap_or_else(|| panic!("column {tag} was not created"))
}

fn target_expr(map: &BTreeMap<VarTag, usize>, links: &[super::Link], target: super::Target) -> Result<AffineExpr, QcError> {
    match target {
        super::Target::Var(tag) => map.get(&tag).map(|&j| v(j)).ok_or(QcError::MissingVariable(tag)),
        super::Target::AngleDiff(k) => {
            let lk = links
                .get(k)
                .ok_or_else(|| QcError::Bounds(format!("no link with index {k}")))?;
            Ok(AffineExpr::new(
                vec![(map[&VarTag::Theta(lk.l)], 1.0), (map[&VarTag::Theta(lk.m)], -1.0)],
                0.0,
            ))
        }
    }
}

/// Flow consistency is applied to untapped branches with a usable denominator.
fn consistency_applies(br: &Branch) -> bool {
    let y2 = br.g * br.g + br.b * br.b;
    let d = y2 + 0.5 * br.b * br.b_charge;
    (br.tap - 1.0).abs() <= 1e-12 && y2 > 0.0 && d.abs() > CONSISTENCY_DENOM_TOL * y2
}
