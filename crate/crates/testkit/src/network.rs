use std::f64::consts::PI;

use qcrelax_core::netdata::{Branch, Bus, Generator, Network};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Path,
    /// A path closed back onto the first bus; on two buses this is a pair of
    /// parallel branches.
    Ring,
    /// Random spanning tree plus extra branches between random bus pairs,
    /// which may duplicate tree edges.
    TreeChords { chords: usize },
}

/// Ranges are sampled uniformly; all values in p.u. or radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomNetworkSpec {
    pub n_buses: usize,
    pub topology: Topology,
    pub resistance: (f64, f64),
    pub reactance: (f64, f64),
    pub charging: (f64, f64),
    /// Distance of each voltage limit from 1.0.
    pub v_width: (f64, f64),
    /// Magnitude of each angle-difference limit.
    pub angle_limit: (f64, f64),
    pub seed: u64,
}

impl RandomNetworkSpec {
    pub fn new(n_buses: usize, topology: Topology, seed: u64) -> Self {
        RandomNetworkSpec {
            n_buses,
            topology,
            resistance: (0.005, 0.05),
            reactance: (0.05, 0.3),
            charging: (0.0, 0.1),
            v_width: (0.04, 0.1),
            angle_limit: (PI / 12.0, PI / 3.0),
            seed,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        let ordered = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !(2..=6).contains(&self.n_buses) {
            return Err(format!("n_buses must be in 2..=6, got {}", self.n_buses));
        }
        let ranges = [self.resistance, self.reactance, self.charging, self.v_width, self.angle_limit];
        if !ranges.iter().all(|&r| ordered(r)) {
            return Err("every range needs finite lo ≤ hi".into());
        }
        if self.resistance.0 < 0.0 || self.reactance.0 <= 0.0 || self.charging.0 < 0.0 {
            return Err("impedances must be non-negative with positive reactance".into());
        }
        if self.v_width.0 < 0.0 || self.v_width.1 >= 0.5 {
            return Err("voltage widths must lie in [0, 0.5)".into());
        }
        if self.angle_limit.0 <= 0.0 || self.angle_limit.1 > PI / 3.0 {
            return Err("angle limits must lie in (0, π/3]".into());
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// Connected network with zero loads, deterministic in `spec.seed`. Bus 1 is
/// the reference and always carries a generator.
///
/// # Panics
/// If `spec.check()` fails.
pub fn gen_network(spec: &RandomNetworkSpec) -> Network {
    if let Err(e) = spec.check() {
        panic!("invalid network spec: {e}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_buses;
    let buses = (0..n)
        .map(|i| {
            let shunt = rng.gen_bool(0.3);
            Bus {
                id: i as i64 + 1,
                p_load: 0.0,
                q_load: 0.0,
                g_shunt: if shunt { rng.gen_range(0.0..0.02) } else { 0.0 },
                b_shunt: if shunt { rng.gen_range(-0.05..0.1) } else { 0.0 },
                v_min: 1.0 - uniform(&mut rng, spec.v_width),
                v_max: 1.0 + uniform(&mut rng, spec.v_width),
                is_reference: i == 0,
            }
        })
        .collect();

    let gen_buses: Vec<usize> = (0..n).filter(|&i| i == 0 || rng.gen_bool(0.4)).collect();
    let generators = gen_buses
        .into_iter()
        .map(|i| Generator {
            bus: i as i64 + 1,
            p_min: 0.0,
            p_max: rng.gen_range(1.0..4.0),
            q_min: -rng.gen_range(0.5..2.0),
            q_max: rng.gen_range(0.5..2.0),
            cost_c2: if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(50.0..500.0) },
            cost_c1: rng.gen_range(500.0..4000.0),
            cost_c0: rng.gen_range(0.0..100.0),
        })
        .collect();

    let mut edges: Vec<(usize, usize)> = match spec.topology {
        Topology::Path => (1..n).map(|i| (i - 1, i)).collect(),
        Topology::Ring => (1..n).map(|i| (i - 1, i)).chain(std::iter::once((n - 1, 0))).collect(),
        Topology::TreeChords { chords } => {
            let mut e: Vec<_> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
            for _ in 0..chords {
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(1..n)) % n;
                e.push((a, b));
            }
            e
        }
    };
    for e in &mut edges {
        if rng.gen_bool(0.5) {
            *e = (e.1, e.0);
        }
    }

    let branches = edges
        .iter()
        .enumerate()
        .map(|(k, &(f, t))| {
            let (g, b) = Branch::admittance(uniform(&mut rng, spec.resistance), uniform(&mut rng, spec.reactance));
            Branch {
                id: k as i64 + 1,
                from_bus: f as i64 + 1,
                to_bus: t as i64 + 1,
                g,
                b,
                b_charge: uniform(&mut rng, spec.charging),
                tap: if rng.gen_bool(0.2) { rng.gen_range(0.95..1.05) } else { 1.0 },
                s_max: if rng.gen_bool(0.5) { Some(rng.gen_range(1.0..4.0)) } else { None },
                theta_min: -uniform(&mut rng, spec.angle_limit),
                theta_max: uniform(&mut rng, spec.angle_limit),
            }
        })
        .collect();

    Network {
        name: format!("random{}_{}", n, spec.seed),
        base_mva: 100.0,
        buses,
        generators,
        branches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_network() {
        let spec = RandomNetworkSpec::new(3, Topology::Path, 1);
        assert_eq!(gen_network(&spec), gen_network(&spec));
    }

    #[test]
    fn ring_closes_the_path() {
        let net = gen_network(&RandomNetworkSpec::new(4, Topology::Ring, 7));
        assert_eq!(net.branches.len(), 4);
    }

    #[test]
    fn invalid_spec_is_reported() {
        let mut spec = RandomNetworkSpec::new(7, Topology::Path, 0);
        assert!(spec.check().is_err());
        spec.n_buses = 3;
        spec.angle_limit = (0.1, 1.2);
        assert!(spec.check().is_err());
    }
}
