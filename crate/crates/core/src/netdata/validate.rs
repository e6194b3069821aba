use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Network;

/// 60 degrees.
pub const DEFAULT_ANGLE_LIMIT: f64 = 1.0472;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidateOptions {
    /// Replacement for angle-difference limits at or beyond ±90°.
    pub default_angle_limit: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            default_angle_limit: DEFAULT_ANGLE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub subject: String,
    pub message: String,
}

impl Diagnostic {
    fn error(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            subject: subject.into(),
            message: message.into(),
        }
    }

    fn warning(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            subject: subject.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}: {}", self.subject, self.message)
    }
}

pub fn validate(network: &mut Network) -> Vec<Diagnostic> {
    validate_with(network, &ValidateOptions::default())
}

/// Checks every network invariant. Loose angle-difference limits are clamped
/// in place and reported as warnings; everything else is reported only.
pub fn validate_with(network: &mut Network, opts: &ValidateOptions) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());

    if !(network.base_mva > 0.0 && network.base_mva.is_finite()) {
        out.push(Diagnostic::error("network", "base_mva must be positive and finite"));
    }
    let refs = network.buses.iter().filter(|b| b.is_reference).count();
    if refs != 1 {
        out.push(Diagnostic::error(
            "network",
            format!("expected exactly one reference bus, found {refs}"),
        ));
    }

    let mut ids = BTreeSet::new();
    for bus in &network.buses {
        let subject = format!("bus {}", bus.id);
        if !ids.insert(bus.id) {
            out.push(Diagnostic::error(&subject, "duplicate bus id"));
        }
        if !finite(&[bus.p_load, bus.q_load, bus.g_shunt, bus.b_shunt, bus.v_min, bus.v_max]) {
            out.push(Diagnostic::error(&subject, "non-finite value"));
        }
        if !(bus.v_min > 0.0) {
            out.push(Diagnostic::error(&subject, format!("v_min = {} must be positive", bus.v_min)));
        }
        if bus.v_min > bus.v_max {
            out.push(Diagnostic::error(
                &subject,
                format!("v_min = {} exceeds v_max = {}", bus.v_min, bus.v_max),
            ));
        }
    }

    for (k, g) in network.generators.iter().enumerate() {
        let subject = format!("generator {k} at bus {}", g.bus);
        if !ids.contains(&g.bus) {
            out.push(Diagnostic::error(&subject, "unknown bus"));
        }
        if !finite(&[g.p_min, g.p_max, g.q_min, g.q_max, g.cost_c2, g.cost_c1, g.cost_c0]) {
            out.push(Diagnostic::error(&subject, "non-finite value"));
        }
        if g.cost_c2 < 0.0 {
            out.push(Diagnostic::error(&subject, "negative quadratic cost coefficient"));
        }
        if g.p_min > g.p_max {
            out.push(Diagnostic::error(&subject, "p_min exceeds p_max"));
        }
        if g.q_min > g.q_max {
            out.push(Diagnostic::error(&subject, "q_min exceeds q_max"));
        }
    }

    let limit = opts.default_angle_limit;
    for br in &mut network.branches {
        let subject = format!("branch {} ({} -> {})", br.id, br.from_bus, br.to_bus);
        if !ids.contains(&br.from_bus) || !ids.contains(&br.to_bus) {
            out.push(Diagnostic::error(&subject, "unknown bus"));
        }
        if br.from_bus == br.to_bus {
            out.push(Diagnostic::error(&subject, "from_bus equals to_bus"));
        }
        if !finite(&[br.g, br.b, br.b_charge, br.tap, br.theta_min, br.theta_max]) {
            out.push(Diagnostic::error(&subject, "non-finite value"));
        }
        if !(br.tap > 0.0) {
            out.push(Diagnostic::error(&subject, "tap ratio must be positive"));
        }
        if let Some(s) = br.s_max {
            if !(s > 0.0 && s.is_finite()) {
                out.push(Diagnostic::error(&subject, "s_max must be positive and finite"));
            }
        }
        if br.theta_min <= -FRAC_PI_2 {
            out.push(Diagnostic::warning(
                &subject,
                format!("theta_min {:.4} clamped to -{limit}", br.theta_min),
            ));
            br.theta_min = -limit;
        }
        if br.theta_max >= FRAC_PI_2 {
            out.push(Diagnostic::warning(
                &subject,
                format!("theta_max {:.4} clamped to {limit}", br.theta_max),
            ));
            br.theta_max = limit;
        }
        if br.theta_min > br.theta_max {
            out.push(Diagnostic::error(&subject, "theta_min exceeds theta_max"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netdata::{Branch, Bus, Generator};

    fn two_bus() -> Network {
        let bus = |id, is_reference| Bus {
            id,
            p_load: 0.0,
            q_load: 0.0,
            g_shunt: 0.0,
            b_shunt: 0.0,
            v_min: 0.9,
            v_max: 1.1,
            is_reference,
        };
        Network {
            name: "two".into(),
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
                g: 1.0,
                b: -10.0,
                b_charge: 0.0,
                tap: 1.0,
                s_max: None,
                theta_min: -0.5,
                theta_max: 0.5,
            }],
        }
    }

    #[test]
    fn valid_network_has_no_diagnostics() {
        assert!(validate(&mut two_bus()).is_empty());
    }

    #[test]
    fn loose_angle_limits_are_clamped() {
        let mut net = two_bus();
        net.branches[0].theta_min = -2.0 * std::f64::consts::PI;
        net.branches[0].theta_max = 2.0 * std::f64::consts::PI;
        let diags = validate(&mut net);
        assert_eq!(diags.len(), 2);
        assert!(diags.iter().all(|d| d.severity == Severity::Warning));
        assert_eq!(net.branches[0].theta_min, -DEFAULT_ANGLE_LIMIT);
        assert_eq!(net.branches[0].theta_max, DEFAULT_ANGLE_LIMIT);
    }

    #[test]
    fn inverted_voltage_limits_are_errors() {
        let mut net = two_bus();
        net.buses[1].v_min = 0.9;
        net.buses[1].v_max = 0.8;
        let diags = validate(&mut net);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].is_error());
    }

    #[test]
    fn two_reference_buses_are_an_error() {
        let mut net = two_bus();
        net.buses[1].is_reference = true;
        assert!(validate(&mut net).iter().any(|d| d.is_error()));
    }

    #[test]
    fn custom_default_limit() {
        let mut net = two_bus();
        net.branches[0].theta_max = 1.6;
        validate_with(&mut net, &ValidateOptions { default_angle_limit: 0.7 });
        assert_eq!(net.branches[0].theta_max, 0.7);
    }
}
