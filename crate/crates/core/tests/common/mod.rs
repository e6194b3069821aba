#![allow(dead_code)]

use qcrelax_core::netdata::{Branch, Bus, Generator, Network};

pub fn bus(id: i64, v_min: f64, v_max: f64, is_reference: bool) -> Bus {
    Bus {
        id,
        p_load: 0.0,
        q_load: 0.0,
        g_shunt: 0.0,
        b_shunt: 0.0,
        v_min,
        v_max,
        is_reference,
    }
}

pub fn generator(bus: i64) -> Generator {
    Generator {
        bus,
        p_min: 0.0,
        p_max: 2.0,
        q_min: -1.0,
        q_max: 1.0,
        cost_c2: 100.0,
        cost_c1: 1000.0,
        cost_c0: 0.0,
    }
}

pub fn branch(id: i64, from_bus: i64, to_bus: i64) -> Branch {
    let (g, b) = Branch::admittance(0.01, 0.1);
    Branch {
        id,
        from_bus,
        to_bus,
        g,
        b,
        b_charge: 0.02,
        tap: 1.0,
        s_max: Some(2.0),
        theta_min: -std::f64::consts::PI / 6.0,
        theta_max: std::f64::consts::PI / 6.0,
    }
}

/// Generator at bus 1 serving a load at bus 2 over one branch.
pub fn two_bus() -> Network {
    let mut b2 = bus(2, 0.95, 1.05, false);
    b2.p_load = 0.5;
    b2.q_load = 0.1;
    Network {
        name: "two".into(),
        base_mva: 100.0,
        buses: vec![bus(1, 0.9, 1.1, true), b2],
        generators: vec![generator(1)],
        branches: vec![branch(1, 1, 2)],
    }
}
