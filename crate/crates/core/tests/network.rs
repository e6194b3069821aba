use proptest::prelude::*;
use qcrelax_core::envelopes::Interval;
use qcrelax_core::netdata::{Branch, Bus, Generator, Network};
use qcrelax_core::obbt::{narrow, Sense};

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

fn bus() -> impl Strategy<Value = Bus> {
    (any::<i64>(), [finite(), finite(), finite(), finite(), finite(), finite()], any::<bool>()).prop_map(
        |(id, f, is_reference)| Bus {
            id,
            p_load: f[0],
            q_load: f[1],
            g_shunt: f[2],
            b_shunt: f[3],
            v_min: f[4],
            v_max: f[5],
            is_reference,
        },
    )
}

fn generator() -> impl Strategy<Value = Generator> {
    (any::<i64>(), prop::array::uniform7(finite())).prop_map(|(bus, f)| Generator {
        bus,
        p_min: f[0],
        p_max: f[1],
        q_min: f[2],
        q_max: f[3],
        cost_c2: f[4],
        cost_c1: f[5],
        cost_c0: f[6],
    })
}

fn branch() -> impl Strategy<Value = Branch> {
    (any::<(i64, i64, i64)>(), prop::array::uniform6(finite()), prop::option::of(finite())).prop_map(
        |((id, from_bus, to_bus), f, s_max)| Branch {
            id,
            from_bus,
            to_bus,
            g: f[0],
            b: f[1],
            b_charge: f[2],
            tap: f[3],
            s_max,
            theta_min: f[4],
            theta_max: f[5],
        },
    )
}

fn network() -> impl Strategy<Value = Network> {
    (
        ".{0,12}",
        finite(),
        prop::collection::vec(bus(), 0..6),
        prop::collection::vec(generator(), 0..4),
        prop::collection::vec(branch(), 0..6),
    )
        .prop_map(|(name, base_mva, buses, generators, branches)| Network {
            name,
            base_mva,
            buses,
            generators,
            branches,
        })
}

proptest! {
    #[test]
    fn json_round_trip_is_exact(net in network()) {
        let back = Network::from_json(&net.to_json()).unwrap();
        prop_assert_eq!(back, net);
    }

    #[test]
    fn narrowing_never_widens(lo in -10.0f64..10.0, width in 0.0f64..5.0, value in -20.0f64..20.0, max in any::<bool>()) {
        let old = Interval::new(lo, lo + width);
        let sense = if max { Sense::Max } else { Sense::Min };
        let new = narrow(old, sense, value);
        prop_assert!(new.lo >= old.lo && new.hi <= old.hi && new.lo <= new.hi);
    }
}
