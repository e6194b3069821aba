//! Per-unit network model and its MATPOWER / JSON front ends.
//!
//! All powers are in p.u. on `base_mva`, angles in radians, and generator
//! cost coefficients are rescaled so the cost is $/hr with power in p.u.

mod matpower;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use matpower::parse_case;
pub use validate::{validate, validate_with, Diagnostic, Severity, ValidateOptions, DEFAULT_ANGLE_LIMIT};

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unsupported feature: {feature}")]
    Unsupported { line: usize, feature: String },
    #[error("network JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown bus id {0}")]
    UnknownBus(i64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: i64,
    pub p_load: f64,
    pub q_load: f64,
    pub g_shunt: f64,
    pub b_shunt: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub is_reference: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: i64,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub cost_c2: f64,
    pub cost_c1: f64,
    pub cost_c0: f64,
}

impl Generator {
    pub fn cost(&self, pg: f64) -> f64 {
        self.cost_c2 * pg * pg + self.cost_c1 * pg + self.cost_c0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: i64,
    pub from_bus: i64,
    pub to_bus: i64,
    /// Series conductance.
    pub g: f64,
    /// Series susceptance.
    pub b: f64,
    /// Total line charging susceptance, split evenly across the terminals.
    pub b_charge: f64,
    /// Off-nominal tap ratio on the from side.
    pub tap: f64,
    /// Apparent-power limit; `None` means unlimited.
    pub s_max: Option<f64>,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Branch {
    /// Series admittance from impedance r + jx.
    pub fn admittance(r: f64, x: f64) -> (f64, f64) {
        let z2 = r * r + x * x;
        (r / z2, -x / z2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub branches: Vec<Branch>,
}

impl Network {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NetError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Bus id to position in `buses`.
    pub fn bus_index(&self) -> BTreeMap<i64, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    pub fn reference_bus(&self) -> Option<usize> {
        self.buses.iter().position(|b| b.is_reference)
    }

    /// Branch endpoints as bus positions.
    pub fn branch_ends(&self) -> Result<Vec<(usize, usize)>, NetError> {
        let idx = self.bus_index();
        self.branches
            .iter()
            .map(|br| {
                let f = *idx.get(&br.from_bus).ok_or(NetError::UnknownBus(br.from_bus))?;
                let t = *idx.get(&br.to_bus).ok_or(NetError::UnknownBus(br.to_bus))?;
                Ok((f, t))
            })
            .collect()
    }

    /// Generator bus positions.
    pub fn generator_buses(&self) -> Result<Vec<usize>, NetError> {
        let idx = self.bus_index();
        self.generators
            .iter()
            .map(|g| idx.get(&g.bus).copied().ok_or(NetError::UnknownBus(g.bus)))
            .collect()
    }
}
