use qcrelax_conic::InteriorPoint;
use qcrelax_core::obbt::{tighten, ObbtConfig};
use qcrelax_core::qcmodel::BoundSet;
use qcrelax_testkit::criteria::{instance, obbt_properties, VARIANTS};

#[test]
fn sequential_obbt_is_sound_monotone_and_idempotent() {
    // the acceptance harness runs the full 50-instance suite
    obbt_properties(20, false).unwrap();
}

#[test]
fn parallel_obbt_is_sound_monotone_and_idempotent() {
    obbt_properties(12, true).unwrap();
}

#[test]
fn parallel_obbt_is_reproducible() {
    for seed in [3, 7, 10] {
        let (net, _) = instance(seed);
        let initial = BoundSet::initial(&net).unwrap();
        let cfg = ObbtConfig {
            variant: VARIANTS[3],
            parallel: true,
            ..ObbtConfig::default()
        };
        let a = tighten(&net, &initial, &cfg, &InteriorPoint).unwrap();
        let b = tighten(&net, &initial, &cfg, &InteriorPoint).unwrap();
        assert_eq!(a.trace.without_timing(), b.trace.without_timing(), "seed {seed}");
        assert_eq!(a.bounds, b.bounds, "seed {seed}");
    }
}

#[test]
fn difference_bounds_shrink_more_than_voltage_bounds() {
    // aggregate over the suite: relative width reduction of V_l − V_m versus V
    let (mut v_gain, mut d_gain) = (0.0, 0.0);
    for seed in 0..20 {
        let (net, _) = instance(seed);
        let initial = BoundSet::initial(&net).unwrap();
        let run = tighten(&net, &initial, &ObbtConfig::default(), &InteriorPoint).unwrap();
        let shrink = |a: &[qcrelax_core::envelopes::Interval], b: &[qcrelax_core::envelopes::Interval]| {
            let w = |xs: &[qcrelax_core::envelopes::Interval]| xs.iter().map(|x| x.width()).sum::<f64>();
            1.0 - w(b) / w(a)
        };
        v_gain += shrink(&initial.v, &run.bounds.v);
        d_gain += shrink(&initial.vdiff, &run.bounds.vdiff);
    }
    assert!(d_gain > v_gain, "vdiff shrink {d_gain} vs v shrink {v_gain}");
}
