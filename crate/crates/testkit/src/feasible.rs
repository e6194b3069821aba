use qcrelax_core::netdata::Network;
use qcrelax_core::qcmodel::{branch_flows, AcPoint, BranchFlows};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Samples drawn before over-limit branches get their limit widened.
pub const FEASIBLE_RETRIES: usize = 50;

/// Widened limits sit this factor above the sampled flow.
const WIDEN: f64 = 1.1;

/// Room kept between a widened generator limit and the dispatch, so the
/// point is interior and the feasible set is not a sliver around it.
const HEADROOM: f64 = 0.05;

struct Sample {
    vm: Vec<f64>,
    va: Vec<f64>,
    flows: Vec<BranchFlows>,
}

fn apparent(f: &BranchFlows) -> f64 {
    f.p_ft.hypot(f.q_ft).max(f.p_tf.hypot(f.q_tf))
}

/// Samples magnitudes and angles inside the network's limits and rewrites
/// loads and generator limits so that the sample is AC-feasible exactly.
///
/// Angles are drawn per bus in ±δ, with δ half the tightest angle-difference
/// limit, so every branch limit holds whatever the topology. Non-generator
/// buses take the negated net injection as load; generator buses keep their
/// load and split the remaining injection evenly over their units, whose
/// limits are stretched to keep the dispatch at least `HEADROOM` inside.
pub fn gen_feasible_point(network: &Network, seed: u64) -> (Network, AcPoint) {
    let mut net = network.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ends = net.branch_ends().expect("branch ends resolve");
    let gen_bus = net.generator_buses().expect("generator buses resolve");
    let reference = net.reference_bus().unwrap_or(0);
    let delta = 0.5
        * net
            .branches
            .iter()
            .map(|b| (-b.theta_min).min(b.theta_max))
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
            .min(1.0);

    let draw = |rng: &mut ChaCha8Rng| {
        let vm: Vec<f64> = net.buses.iter().map(|b| rng.gen_range(b.v_min..=b.v_max)).collect();
        let mut va: Vec<f64> = (0..net.buses.len()).map(|_| if delta > 0.0 { rng.gen_range(-delta..=delta) } else { 0.0 }).collect();
        let shift = va[reference];
        va.iter_mut().for_each(|a| *a -= shift);
        let flows = net
            .branches
            .iter()
            .zip(&ends)
            .map(|(br, &(f, t))| branch_flows(br, vm[f], vm[t], va[f] - va[t]))
            .collect();
        Sample { vm, va, flows }
    };
    let within = |s: &Sample, net: &Network| {
        net.branches.iter().zip(&s.flows).all(|(br, fl)| br.s_max.map_or(true, |lim| apparent(fl) <= lim))
    };

    let mut sample = draw(&mut rng);
    for _ in 1..FEASIBLE_RETRIES {
        if within(&sample, &net) {
            break;
        }
        sample = draw(&mut rng);
    }
    for (br, fl) in net.branches.iter_mut().zip(&sample.flows) {
        if let Some(lim) = br.s_max {
            let s = apparent(fl);
            if s > lim {
                br.s_max = Some(WIDEN * s);
            }
        }
    }

    // net injection each bus must supply: outgoing flows plus shunt draw
    let n = net.buses.len();
    let mut p_need = vec![0.0; n];
    let mut q_need = vec![0.0; n];
    for (fl, &(f, t)) in sample.flows.iter().zip(&ends) {
        p_need[f] += fl.p_ft;
        q_need[f] += fl.q_ft;
        p_need[t] += fl.p_tf;
        q_need[t] += fl.q_tf;
    }
    for (i, bus) in net.buses.iter().enumerate() {
        let w = sample.vm[i] * sample.vm[i];
        p_need[i] += bus.g_shunt * w;
        q_need[i] -= bus.b_shunt * w;
    }

    let mut units = vec![0usize; n];
    gen_bus.iter().for_each(|&i| units[i] += 1);
    for (i, bus) in net.buses.iter_mut().enumerate() {
        if units[i] == 0 {
            bus.p_load = -p_need[i];
            bus.q_load = -q_need[i];
        }
    }
    let mut pg = Vec::with_capacity(net.generators.len());
    let mut qg = Vec::with_capacity(net.generators.len());
    for (k, g) in net.generators.iter_mut().enumerate() {
        let i = gen_bus[k];
        let bus = &net.buses[i];
        let p = (p_need[i] + bus.p_load) / units[i] as f64;
        let q = (q_need[i] + bus.q_load) / units[i] as f64;
        if p < g.p_min + HEADROOM {
            g.p_min = g.p_min.min(p - HEADROOM);
        }
        if p > g.p_max - HEADROOM {
            g.p_max = g.p_max.max(p + HEADROOM);
        }
        if q < g.q_min + HEADROOM {
            g.q_min = g.q_min.min(q - HEADROOM);
        }
        if q > g.q_max - HEADROOM {
            g.q_max = g.q_max.max(q + HEADROOM);
        }
        pg.push(p);
        qg.push(q);
    }

    let point = AcPoint {
        vm: sample.vm,
        va: sample.va,
        pg,
        qg,
    };
    (net, point)
}

#[cfg(test)]
mod tests {
    use qcrelax_core::netdata::{Branch, Bus, Generator};
    use qcrelax_core::qcmodel::check_ac_point;

    use super::*;

    fn flat_two_bus() -> Network {
        let bus = |id, is_reference| Bus {
            id,
            p_load: 0.0,
            q_load: 0.0,
            g_shunt: 0.0,
            b_shunt: 0.0,
            v_min: 1.0,
            v_max: 1.0,
            is_reference,
        };
        let (g, b) = Branch::admittance(0.01, 0.1);
        Network {
            name: "flat".into(),
            base_mva: 100.0,
            buses: vec![bus(1, true), bus(2, false)],
            generators: vec![Generator {
                bus: 1,
                p_min: 0.0,
                p_max: 1.0,
                q_min: -1.0,
                q_max: 1.0,
                cost_c2: 1.0,
                cost_c1: 1.0,
                cost_c0: 0.0,
            }],
            branches: vec![Branch {
                id: 1,
                from_bus: 1,
                to_bus: 2,
                g,
                b,
                b_charge: 0.0,
                tap: 1.0,
                s_max: None,
                theta_min: 0.0,
                theta_max: 0.0,
            }],
        }
    }

    #[test]
    fn flat_point_has_no_flow_and_no_load() {
        let (net, point) = gen_feasible_point(&flat_two_bus(), 3);
        assert_eq!(point.vm, vec![1.0, 1.0]);
        assert_eq!(point.va, vec![0.0, 0.0]);
        assert!(net.buses.iter().all(|b| b.p_load == 0.0 && b.q_load == 0.0));
        assert_eq!((point.pg[0], point.qg[0]), (0.0, 0.0));
        assert!(check_ac_point(&net, &point).unwrap().max_violation() <= 1e-12);
    }

    #[test]
    fn tight_flow_limit_is_widened() {
        let mut net = flat_two_bus();
        net.buses[1].v_min = 0.9;
        net.branches[0].s_max = Some(1e-9);
        net.branches[0].theta_min = -0.3;
        net.branches[0].theta_max = 0.3;
        let (out, point) = gen_feasible_point(&net, 11);
        assert!(out.branches[0].s_max.unwrap() > 1e-9);
        assert!(check_ac_point(&out, &point).unwrap().max_violation() <= 1e-9);
    }
}
