use qcrelax_conic::{
    solve, AffineExpr, ConeConstraint, ConicProgram, RowSense, SolveStatus, SolverSettings, VarBounds,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn settings() -> SolverSettings {
    SolverSettings::default()
}

#[test]
fn one_variable_lp() {
    let mut p = ConicProgram::new();
    let x = p.add_var("x", VarBounds::FREE);
    p.add_row(vec![(x, 1.0)], RowSense::Ge, 1.0);
    p.set_objective(&[(x, 1.0)], 0.0);
    let r = solve(&p, &settings()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective - 1.0).abs() <= 1e-7, "{r:?}");
    assert!(r.iterations < 50);
    let rep = p.evaluate(r.primal.as_ref().unwrap()).unwrap();
    assert!(rep.max_violation() <= 1e-8);
}

#[test]
fn euclidean_norm_soc() {
    let mut p = ConicProgram::new();
    let t = p.add_var("t", VarBounds::FREE);
    p.add_cone(ConeConstraint::second_order(vec![
        AffineExpr::var(t),
        AffineExpr::constant(3.0),
        AffineExpr::constant(4.0),
    ]));
    p.set_objective(&[(t, 1.0)], 0.0);
    let r = solve(&p, &settings()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective - 5.0).abs() <= 1e-7, "{r:?}");
    assert!(r.iterations < 50);
}

#[test]
fn rotated_cone_with_fixed_variable() {
    let mut p = ConicProgram::new();
    let u = p.add_var("u", VarBounds::FREE);
    let x = p.add_var("x", VarBounds::new(2.0, 2.0));
    p.add_cone(ConeConstraint::rotated(vec![
        AffineExpr::var(u),
        AffineExpr::constant(1.0),
        AffineExpr::var(x),
    ]));
    p.set_objective(&[(u, 1.0)], 0.0);
    let r = solve(&p, &settings()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective - 2.0).abs() <= 1e-7, "{r:?}");
    let x_out = r.primal.unwrap();
    assert_eq!(x_out[1], 2.0);
}

#[test]
fn rotated_cone_with_equality_fixed_variable() {
    let mut p = ConicProgram::new();
    let u = p.add_var("u", VarBounds::FREE);
    let x = p.add_var("x", VarBounds::FREE);
    p.add_row(vec![(x, 1.0)], RowSense::Eq, 2.0);
    p.add_cone(ConeConstraint::rotated(vec![
        AffineExpr::var(u),
        AffineExpr::constant(1.0),
        AffineExpr::var(x),
    ]));
    p.set_objective(&[(u, 1.0)], 0.0);
    let r = solve(&p, &settings()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective - 2.0).abs() <= 1e-7, "{r:?}");
}

#[test]
fn detects_primal_infeasibility() {
    let mut p = ConicProgram::new();
    let x = p.add_var("x", VarBounds::FREE);
    p.add_row(vec![(x, 1.0)], RowSense::Ge, 2.0);
    p.add_row(vec![(x, 1.0)], RowSense::Le, 1.0);
    p.set_objective(&[(x, 1.0)], 0.0);
    let r = solve(&p, &settings()).unwrap();
    assert_eq!(r.status, SolveStatus::Infeasible, "{r:?}");
    assert!(r.primal.is_none());
    assert!(r.certificate.is_some());
}

#[test]
fn detects_infeasible_cone() {
    // ‖(1, x)‖ ≤ t with t ≤ 0.5
    let mut p = ConicProgram::new();
    let t = p.add_var("t", VarBounds::new(f64::NEG_INFINITY, 0.5));
    let x = p.add_var("x", VarBounds::FREE);
    p.add_cone(ConeConstraint::second_order(vec![
        AffineExpr::var(t),
        AffineExpr::constant(1.0),
        AffineExpr::var(x),
    ]));
    let r = solve(&p, &settings()).unwrap();
    assert_eq!(r.status, SolveStatus::Infeasible, "{r:?}");
}

#[test]
fn detects_unboundedness() {
    let mut p = ConicProgram::new();
    let x = p.add_var("x", VarBounds::new(f64::NEG_INFINITY, 3.0));
    p.set_objective(&[(x, 1.0)], 0.0);
    let r = solve(&p, &settings()).unwrap();
    assert_eq!(r.status, SolveStatus::Unbounded, "{r:?}");
}

#[test]
fn iteration_limit_is_reported() {
    let mut p = ConicProgram::new();
    let t = p.add_var("t", VarBounds::FREE);
    p.add_cone(ConeConstraint::second_order(vec![
        AffineExpr::var(t),
        AffineExpr::constant(3.0),
        AffineExpr::constant(4.0),
    ]));
    p.set_objective(&[(t, 1.0)], 0.0);
    let s = SolverSettings {
        max_iters: 1,
        ..settings()
    };
    let r = solve(&p, &s).unwrap();
    assert_eq!(r.status, SolveStatus::IterationLimit);
    assert!(r.primal.is_none());
}

/// Random feasible SOCP: a known point x0 is made feasible by construction,
/// and boxes keep the problem bounded.
fn random_socp(seed: u64) -> (ConicProgram, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..10);
    let mut p = ConicProgram::new();
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for j in 0..n {
        p.add_var(format!("x{j}"), VarBounds::new(-5.0, 5.0));
    }
    let rows = rng.gen_range(1..n + 3);
    for _ in 0..rows {
        let mut terms: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                terms.push((j, rng.gen_range(-2.0..2.0)));
            }
        }
        if terms.is_empty() {
            continue;
        }
        let lhs: f64 = terms.iter().map(|&(j, a)| a * x0[j]).sum();
        match rng.gen_range(0..3) {
            0 => p.add_row(terms, RowSense::Le, lhs + rng.gen_range(0.0..1.0)),
            1 => p.add_row(terms, RowSense::Ge, lhs - rng.gen_range(0.0..1.0)),
            _ => {
                if rng.gen_bool(0.3) {
                    p.add_row(terms, RowSense::Eq, lhs)
                }
            }
        }
    }
    let ncones = rng.gen_range(1..4);
    for _ in 0..ncones {
        let k = rng.gen_range(1..4);
        let mut members = Vec::new();
        let mut tail = 0.0;
        for _ in 0..k {
            let j = rng.gen_range(0..n);
            let a = rng.gen_range(-1.0..1.0);
            let c = rng.gen_range(-0.5..0.5);
            tail += (a * x0[j] + c) * (a * x0[j] + c);
            members.push(AffineExpr::new(vec![(j, a)], c));
        }
        let j = rng.gen_range(0..n);
        let a = rng.gen_range(-1.0..1.0);
        let head_needed = tail.sqrt() + rng.gen_range(0.0..0.5);
        let c = head_needed - a * x0[j];
        let mut all = vec![AffineExpr::new(vec![(j, a)], c)];
        all.extend(members);
        p.add_cone(ConeConstraint::second_order(all));
    }
    let obj: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(-1.0..1.0))).collect();
    p.set_objective(&obj, 0.0);
    (p, x0)
}

#[test]
fn weak_duality_on_random_feasible_socps() {
    for seed in 0..100 {
        let (p, x0) = random_socp(seed);
        let known = p.objective_value(&x0);
        let r = solve(&p, &settings()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal, "seed {seed}: {r:?}");
        assert!(r.objective <= known + 1e-6, "seed {seed}: {} > {known}", r.objective);
        let rep = p.evaluate(r.primal.as_ref().unwrap()).unwrap();
        assert!(rep.max_violation() <= 1e-6, "seed {seed}: violation {}", rep.max_violation());
        assert!((r.objective - r.dual_objective).abs() <= 1e-6 * (1.0 + r.objective.abs()));
    }
}

#[test]
fn solve_is_deterministic() {
    for seed in [3, 17, 42] {
        let (p, _) = random_socp(seed);
        let a = solve(&p, &settings()).unwrap();
        let b = solve(&p, &settings()).unwrap();
        assert_eq!(a.status, b.status);
        assert!((a.objective - b.objective).abs() <= 1e-10);
        assert_eq!(a.primal, b.primal);
    }
}

#[test]
fn objective_scaling_scales_optimum() {
    for seed in [5, 11, 23] {
        let (p, _) = random_socp(seed);
        let mut q = p.clone();
        q.objective.iter_mut().for_each(|c| *c *= 7.5);
        let a = solve(&p, &settings()).unwrap();
        let b = solve(&q, &settings()).unwrap();
        assert!((b.objective - 7.5 * a.objective).abs() <= 1e-8_f64.max(1e-8 * b.objective.abs()) * 10.0);
        let xa = a.primal.unwrap();
        let xb = b.primal.unwrap();
        // argmin may be non-unique; compare objective-level agreement instead
        assert!((p.objective_value(&xa) - p.objective_value(&xb)).abs() <= 1e-6);
    }
}
