//! Property suites shared by the integration tests and the acceptance
//! harness. Each returns a one-line summary on success and the first
//! counterexample on failure.

use std::f64::consts::PI;

use qcrelax_conic::{
    solve, AffineExpr, ConeConstraint, ConicProgram, InteriorPoint, RowSense, SolveStatus, SolverSettings, VarBounds,
};
use qcrelax_core::envelopes::{mccormick, Interval, MfCase, TrigKind};
use qcrelax_core::netdata::{validate, Network};
use qcrelax_core::obbt::{tighten, ObbtConfig, ObbtOutcome};
use qcrelax_core::qcmodel::{build, check_ac_point, lift_ac_point, links, AcPoint, BoundSet, QcVariant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{envelope_oracle, gen_feasible_point, gen_network, random_trilinear_box, trilinear_envelope};
use crate::{trilinear_range, OracleKind, RandomNetworkSpec, Topology};

pub type Outcome = Result<String, String>;

pub const ENVELOPE_TOL: f64 = 1e-9;
pub const DOMINANCE_TOL: f64 = 1e-7;
pub const VERTEX_TOL: f64 = 1e-9;
pub const LIFT_SLACK: f64 = 1e-8;
pub const BOUND_REL_TOL: f64 = 1e-6;
pub const SOLVER_TOL: f64 = 1e-7;
pub const SOLVER_MAX_ITERS: usize = 50;

pub const VARIANTS: [QcVariant; 4] = [
    QcVariant::new(false, false),
    QcVariant::new(true, false),
    QcVariant::new(false, true),
    QcVariant::new(true, true),
];

/// Instance `seed` of the shared suite: 2–6 buses over all topologies, with
/// an AC-feasible point built into it.
pub fn instance(seed: u64) -> (Network, AcPoint) {
    let n = 2 + (seed % 5) as usize;
    let topology = match seed % 4 {
        0 => Topology::Path,
        1 => Topology::Ring,
        2 => Topology::TreeChords { chords: 1 },
        _ => Topology::TreeChords { chords: 2 },
    };
    let net = gen_network(&RandomNetworkSpec::new(n, topology, seed));
    let (mut net, point) = gen_feasible_point(&net, seed ^ 0x5eed);
    let errors: Vec<_> = validate(&mut net).into_iter().filter(|d| d.is_error()).collect();
    assert!(errors.is_empty(), "seed {seed}: {errors:?}");
    (net, point)
}

/// Every MF case on the sine path plus the cosine-only Case II/III path.
pub fn trilinear_regimes() -> Vec<(MfCase, TrigKind)> {
    let mut out: Vec<_> = MfCase::ALL.iter().map(|&c| (c, TrigKind::Sin)).collect();
    out.extend([(MfCase::II, TrigKind::Cos), (MfCase::III, TrigKind::Cos)]);
    out
}

fn angle_box(rng: &mut ChaCha8Rng) -> Interval {
    let a = rng.gen_range(-PI / 3.0..PI / 3.0);
    let b = if rng.gen_bool(0.05) { a } else { rng.gen_range(-PI / 3.0..PI / 3.0) };
    Interval::new(a.min(b), a.max(b))
}

fn any_box(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Interval {
    let a = rng.gen_range(lo..hi);
    let b = rng.gen_range(lo..hi);
    Interval::new(a.min(b), a.max(b))
}

/// Grid containment of every envelope kind on `boxes` boxes per regime.
pub fn envelope_containment(boxes: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    let mut check = |kind: OracleKind, density: usize| -> Result<(), String> {
        let w = envelope_oracle(&kind, density).map_err(|e| format!("{kind:?}: {e}"))?;
        worst = worst.min(w);
        checked += 1;
        if w < -ENVELOPE_TOL {
            return Err(format!("{kind:?}: violation {:.3e}", -w));
        }
        Ok(())
    };
    for _ in 0..boxes {
        let th = angle_box(&mut rng);
        check(OracleKind::Sin(th), 201)?;
        check(OracleKind::Cos(th), 201)?;
        let x = any_box(&mut rng, -2.0, 2.0);
        check(OracleKind::Square(x), 201)?;
        let y = any_box(&mut rng, -2.0, 2.0);
        check(OracleKind::Bilinear(x, y), 41)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (case, kind) in trilinear_regimes() {
        for _ in 0..boxes {
            let domain = random_trilinear_box(case, kind, &mut rng);
            for mf in [true, false] {
                check(OracleKind::Trilinear { domain, mf }, 9).map_err(|e| format!("{case} {e}"))?;
            }
        }
    }
    Ok(format!("{checked} envelopes, worst slack {worst:.2e}"))
}

/// Pointwise comparison of MF and nested McCormick on a 5×5×5 grid per box,
/// spread evenly over the trilinear regimes.
pub fn mf_dominance(boxes: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let regimes = trilinear_regimes();
    let mut worst = f64::NEG_INFINITY;
    for b in 0..boxes {
        let (case, kind) = regimes[b % regimes.len()];
        let domain = random_trilinear_box(case, kind, &mut rng);
        let mf = trilinear_envelope(&domain, true).map_err(|e| e.to_string())?;
        let nested = trilinear_envelope(&domain, false).map_err(|e| e.to_string())?;
        let at = |b: Interval, s: usize| b.lo + b.width() * s as f64 / 4.0;
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..5 {
                    let (x, y, z) = (at(domain.x, i), at(domain.y, j), at(domain.z, k));
                    let (mlo, mhi) = trilinear_range(&mf.facets, x, y, z).ok_or("empty MF slice")?;
                    let (nlo, nhi) = trilinear_range(&nested.facets, x, y, z).ok_or("empty nested slice")?;
                    let excess = (mhi - nhi).max(nlo - mlo);
                    worst = worst.max(excess);
                    if excess > DOMINANCE_TOL {
                        return Err(format!(
                            "{case} {domain:?} at ({x}, {y}, {z}): MF [{mlo}, {mhi}] vs nested [{nlo}, {nhi}]"
                        ));
                    }
                }
            }
        }
    }
    Ok(format!("{boxes} boxes x 125 points, worst excess {worst:.2e}"))
}

/// MF envelope meets xyz exactly at all 8 box vertices, and McCormick is
/// exact at the 4 bilinear vertices.
pub fn mf_vertex_tightness(boxes: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for (case, kind) in trilinear_regimes() {
        for _ in 0..boxes {
            let domain = random_trilinear_box(case, kind, &mut rng);
            let env = trilinear_envelope(&domain, true).map_err(|e| e.to_string())?;
            for [x, y, z] in domain.vertices() {
                let (lo, hi) = trilinear_range(&env.facets, x, y, z).ok_or("empty MF slice")?;
                let t = x * y * z;
                let gap = (lo - t).abs().max((hi - t).abs());
                worst = worst.max(gap);
                if gap > VERTEX_TOL {
                    return Err(format!("{case} {domain:?} at ({x}, {y}, {z}): [{lo}, {hi}] vs {t}"));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (x, y, xy) = (AffineExpr::var(0), AffineExpr::var(1), AffineExpr::var(2));
    for _ in 0..boxes {
        let bx = any_box(&mut rng, -2.0, 2.0);
        let by = any_box(&mut rng, -2.0, 2.0);
        let facets = mccormick(&x, &y, &xy, bx, by);
        for vx in [bx.lo, bx.hi] {
            for vy in [by.lo, by.hi] {
                let point = [vx, vy, vx * vy];
                if facets.iter().any(|f| f.slack(&point) < -VERTEX_TOL) {
                    return Err(format!("McCormick {bx:?} {by:?} cuts vertex ({vx}, {vy})"));
                }
                if facets.iter().filter(|f| f.slack(&point).abs() <= VERTEX_TOL).count() < 2 {
                    return Err(format!("McCormick {bx:?} {by:?} loose at vertex ({vx}, {vy})"));
                }
            }
        }
    }
    Ok(format!("worst vertex gap {worst:.2e}"))
}

/// Lifted AC points satisfy every variant's constraints and every variant's
/// bound stays below the AC objective.
pub fn relaxation_validity(seeds: u64) -> Outcome {
    let settings = SolverSettings::default();
    let mut worst_slack: f64 = 0.0;
    let mut solves = 0;
    for seed in 0..seeds {
        let (net, point) = instance(seed);
        let ac = check_ac_point(&net, &point).map_err(|e| e.to_string())?;
        if ac.max_violation() > 1e-9 {
            return Err(format!("seed {seed}: generated point violates AC by {:.2e}", ac.max_violation()));
        }
        let bounds = BoundSet::initial(&net).map_err(|e| e.to_string())?;
        for variant in VARIANTS {
            let tag = format!("seed {seed} mf={} vdiff={}", variant.use_mf, variant.use_vdiff);
            let model = build(&net, &bounds, variant).map_err(|e| format!("{tag}: {e}"))?;
            let x = lift_ac_point(&net, &model, &point).map_err(|e| format!("{tag}: {e}"))?;
            let v = model.program.evaluate(&x).map_err(|e| format!("{tag}: {e}"))?.max_violation();
            worst_slack = worst_slack.max(v);
            if v > LIFT_SLACK {
                return Err(format!("{tag}: lifted point violates by {v:.2e}"));
            }
            let sol = solve(&model.program, &settings).map_err(|e| format!("{tag}: {e}"))?;
            if !sol.has_solution() {
                return Err(format!("{tag}: solver status {}", sol.status));
            }
            let bound = sol.lower_bound();
            if bound > ac.objective + BOUND_REL_TOL * ac.objective.abs().max(1.0) {
                return Err(format!("{tag}: bound {bound} above AC {}", ac.objective));
            }
            solves += 1;
        }
    }
    Ok(format!("{solves} relaxations, worst lifted violation {worst_slack:.2e}"))
}

fn contains_point(bounds: &BoundSet, net: &Network, p: &AcPoint) -> Result<(), String> {
    for (i, v) in bounds.v.iter().enumerate() {
        if !v.contains(p.vm[i], LIFT_SLACK) {
            return Err(format!("v[{i}] = {} outside {v:?}", p.vm[i]));
        }
    }
    for (k, lk) in links(net).map_err(|e| e.to_string())?.iter().enumerate() {
        let d = p.va[lk.l] - p.va[lk.m];
        if !bounds.theta[k].contains(d, LIFT_SLACK) {
            return Err(format!("theta_diff[{k}] = {d} outside {:?}", bounds.theta[k]));
        }
        let dv = p.vm[lk.l] - p.vm[lk.m];
        if !bounds.vdiff[k].contains(dv, LIFT_SLACK) {
            return Err(format!("vdiff[{k}] = {dv} outside {:?}", bounds.vdiff[k]));
        }
    }
    Ok(())
}

fn qc_bound(net: &Network, b: &BoundSet, variant: QcVariant) -> Result<f64, String> {
    let model = build(net, b, variant).map_err(|e| e.to_string())?;
    let r = solve(&model.program, &SolverSettings::default()).map_err(|e| e.to_string())?;
    if !r.has_solution() {
        return Err(format!("solver status {}", r.status));
    }
    Ok(r.lower_bound())
}

pub fn max_shift(a: &BoundSet, b: &BoundSet) -> f64 {
    let pairs = a.v.iter().zip(&b.v).chain(a.theta.iter().zip(&b.theta)).chain(a.vdiff.iter().zip(&b.vdiff));
    pairs.map(|(x, y)| (x.lo - y.lo).abs().max((x.hi - y.hi).abs())).fold(0.0, f64::max)
}

/// Bound tightening run to its fixpoint never widens a bound, never excludes
/// the instance's AC point, never lowers the QC bound and reproduces itself
/// when rerun on its own output.
pub fn obbt_properties(seeds: u64, parallel: bool) -> Outcome {
    let mut sweeps = 0;
    let mut gain: f64 = 0.0;
    for seed in 0..seeds {
        let (net, point) = instance(seed);
        let initial = BoundSet::initial(&net).map_err(|e| e.to_string())?;
        // a budget large enough to reach the fixpoint
        let cfg = ObbtConfig {
            variant: VARIANTS[seed as usize % 4],
            max_sweeps: 200,
            parallel,
            ..ObbtConfig::default()
        };
        let run = tighten(&net, &initial, &cfg, &InteriorPoint).map_err(|e| format!("seed {seed}: {e}"))?;
        if run.outcome != ObbtOutcome::Converged {
            return Err(format!("seed {seed}: outcome {:?}", run.outcome));
        }
        sweeps += run.trace.sweeps.len();
        if !run.bounds.is_subset_of(&initial) {
            return Err(format!("seed {seed}: final bounds leave the initial box"));
        }
        for e in run.trace.sweeps.iter().flat_map(|s| &s.entries) {
            if !e.new.is_subset_of(&e.old) {
                return Err(format!("seed {seed}: {} widened {:?} -> {:?}", e.target, e.old, e.new));
            }
        }
        contains_point(&run.bounds, &net, &point).map_err(|e| format!("seed {seed}: AC point excluded, {e}"))?;
        let before = qc_bound(&net, &initial, cfg.variant).map_err(|e| format!("seed {seed}: {e}"))?;
        let after = qc_bound(&net, &run.bounds, cfg.variant).map_err(|e| format!("seed {seed}: {e}"))?;
        if after < before - BOUND_REL_TOL * before.abs().max(1.0) {
            return Err(format!("seed {seed}: bound dropped {before} -> {after}"));
        }
        gain = gain.max((after - before) / before.abs().max(1.0));
        let again = tighten(&net, &run.bounds, &cfg, &InteriorPoint).map_err(|e| format!("seed {seed}: {e}"))?;
        let shift = max_shift(&run.bounds, &again.bounds);
        if shift > cfg.tol {
            return Err(format!("seed {seed}: rerun moved a bound by {shift:.2e}"));
        }
    }
    Ok(format!("{seeds} instances, {sweeps} sweeps, largest relative bound gain {:.2}%", 100.0 * gain))
}

fn check_analytic(name: &str, p: &ConicProgram, expected: f64) -> Result<String, String> {
    let r = solve(p, &SolverSettings::default()).map_err(|e| format!("{name}: {e}"))?;
    let err = (r.objective - expected).abs();
    if r.status != SolveStatus::Optimal || err > SOLVER_TOL || r.iterations >= SOLVER_MAX_ITERS {
        return Err(format!("{name}: status {} objective {} after {} iterations", r.status, r.objective, r.iterations));
    }
    Ok(format!("{name} err {err:.1e} in {} its", r.iterations))
}

/// The three analytic programs: min x s.t. x ≥ 1; min t s.t. ‖(3, 4)‖ ≤ t;
/// min u s.t. 2u·1 ≥ x² with x fixed at 2.
pub fn solver_reference() -> Outcome {
    let mut lp = ConicProgram::new();
    let x = lp.add_var("x", VarBounds::FREE);
    lp.add_row(vec![(x, 1.0)], RowSense::Ge, 1.0);
    lp.set_objective(&[(x, 1.0)], 0.0);

    let mut soc = ConicProgram::new();
    let t = soc.add_var("t", VarBounds::FREE);
    soc.add_cone(ConeConstraint::second_order(vec![
        AffineExpr::var(t),
        AffineExpr::constant(3.0),
        AffineExpr::constant(4.0),
    ]));
    soc.set_objective(&[(t, 1.0)], 0.0);

    let mut rot = ConicProgram::new();
    let u = rot.add_var("u", VarBounds::FREE);
    let x = rot.add_var("x", VarBounds::new(2.0, 2.0));
    rot.add_cone(ConeConstraint::rotated(vec![
        AffineExpr::var(u),
        AffineExpr::constant(1.0),
        AffineExpr::var(x),
    ]));
    rot.set_objective(&[(u, 1.0)], 0.0);

    let parts = [
        check_analytic("lp", &lp, 1.0)?,
        check_analytic("soc", &soc, 5.0)?,
        check_analytic("rotated", &rot, 2.0)?,
    ];
    Ok(parts.join(", "))
}
