mod common;

use qcrelax_conic::{ConicError, ConicProgram, ConicSolver, InteriorPoint, SolveResult, SolveStatus, SolverSettings};
use qcrelax_core::netdata::Network;
use qcrelax_core::obbt::{tighten, BoundTarget, ObbtConfig, ObbtOutcome, Sense};
use qcrelax_core::qcmodel::{BoundSet, QcVariant};

use common::{bus, generator, two_bus};

struct Failing;

impl ConicSolver for Failing {
    fn name(&self) -> &'static str {
        "failing"
    }

    fn solve(&self, _: &ConicProgram, _: &SolverSettings) -> Result<SolveResult, ConicError> {
        Ok(SolveResult {
            status: SolveStatus::NumericalFailure,
            primal: None,
            objective: f64::NAN,
            dual_objective: f64::NAN,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
            gap: f64::NAN,
            iterations: 0,
            wall_time: Default::default(),
            certificate: None,
        })
    }
}

fn single_bus() -> Network {
    let mut b = bus(1, 0.9, 1.1, true);
    b.p_load = 0.3;
    Network {
        name: "single".into(),
        base_mva: 100.0,
        buses: vec![b],
        generators: vec![generator(1)],
        branches: vec![],
    }
}

#[test]
fn isolated_bus_keeps_its_box() {
    let net = single_bus();
    let initial = BoundSet::initial(&net).unwrap();
    let run = tighten(&net, &initial, &ObbtConfig::default(), &InteriorPoint).unwrap();
    assert_eq!(run.bounds, initial);
    assert_eq!(run.trace.sweeps.len(), 1);
    assert_eq!(run.outcome, ObbtOutcome::Converged);
}

#[test]
fn numerical_failure_leaves_bounds_unchanged() {
    let net = two_bus();
    let initial = BoundSet::initial(&net).unwrap();
    let run = tighten(&net, &initial, &ObbtConfig::default(), &Failing).unwrap();
    assert_eq!(run.bounds, initial);
    assert_eq!(run.outcome, ObbtOutcome::Converged);
    let entries = &run.trace.sweeps[0].entries;
    assert!(!entries.is_empty());
    assert!(entries.iter().all(|e| e.status == "numerical-failure" && e.new == e.old));
}

#[test]
fn lossless_line_pins_the_angle_difference() {
    // no load, no shunts, no generation at either end: flows and losses vanish
    let mut net = two_bus();
    net.buses[1].p_load = 0.0;
    net.buses[1].q_load = 0.0;
    net.branches[0].b_charge = 0.0;
    net.generators[0].p_max = 0.0;
    net.generators[0].q_min = 0.0;
    net.generators[0].q_max = 0.0;
    let initial = BoundSet::initial(&net).unwrap();
    let config = ObbtConfig {
        max_sweeps: 50,
        ..Default::default()
    };
    let run = tighten(&net, &initial, &config, &InteriorPoint).unwrap();
    let theta = run.bounds.theta[0];
    assert!(theta.lo > -1e-3 && theta.lo <= 0.0, "{theta:?}");
    assert!(theta.hi < 1e-3 && theta.hi >= 0.0, "{theta:?}");
}

#[test]
fn sequential_trace_is_deterministic() {
    let net = two_bus();
    let initial = BoundSet::initial(&net).unwrap();
    let config = ObbtConfig::default();
    let a = tighten(&net, &initial, &config, &InteriorPoint).unwrap();
    let b = tighten(&net, &initial, &config, &InteriorPoint).unwrap();
    assert_eq!(a.trace.without_timing(), b.trace.without_timing());
    assert_eq!(a.bounds, b.bounds);
}

#[test]
fn sweep_visits_voltages_then_angles_then_differences() {
    let net = two_bus();
    let initial = BoundSet::initial(&net).unwrap();
    let config = ObbtConfig {
        max_sweeps: 1,
        ..Default::default()
    };
    let run = tighten(&net, &initial, &config, &InteriorPoint).unwrap();
    let order: Vec<(BoundTarget, Sense)> = run.trace.sweeps[0].entries.iter().map(|e| (e.target, e.sense)).collect();
    use BoundTarget::*;
    use Sense::*;
    let expected = vec![
        (Voltage(0), Min),
        (Voltage(0), Max),
        (Voltage(1), Min),
        (Voltage(1), Max),
        (AngleDiff(0), Min),
        (AngleDiff(0), Max),
        (VoltageDiff(0), Min),
        (VoltageDiff(0), Max),
    ];
    assert_eq!(order, expected);

    let no_vdiff = ObbtConfig {
        variant: QcVariant::new(true, false),
        ..config
    };
    let run = tighten(&net, &initial, &no_vdiff, &InteriorPoint).unwrap();
    assert_eq!(run.trace.sweeps[0].entries.len(), 6);
}

#[test]
fn infeasible_instance_is_a_distinguished_outcome() {
    let mut net = two_bus();
    net.buses[1].p_load = 5.0;
    let initial = BoundSet::initial(&net).unwrap();
    let run = tighten(&net, &initial, &ObbtConfig::default(), &InteriorPoint).unwrap();
    assert!(matches!(run.outcome, ObbtOutcome::Infeasible { .. }), "{:?}", run.outcome);
}
