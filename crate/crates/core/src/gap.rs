//! Optimality gap between a local (upper-bound) objective and a relaxation
//! bound, in percent.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GapError {
    #[error("gap is undefined for a non-positive denominator {0}")]
    NonPositiveDenominator(f64),
}

/// Which objective divides the difference. `Bound` is the default; `Local`
/// is the more common convention in the literature.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapDenominator {
    #[default]
    Bound,
    Local,
}

/// 100 · (local − bound) / denominator.
pub fn gap_percent(local: f64, bound: f64, denominator: GapDenominator) -> Result<f64, GapError> {
    let d = match denominator {
        GapDenominator::Bound => bound,
        GapDenominator::Local => local,
    };
    if !(d > 0.0) {
        return Err(GapError::NonPositiveDenominator(d));
    }
    Ok(100.0 * (local - bound) / d)
}

/// Bound implied by a local objective and a bound-denominated gap.
pub fn implied_bound(local: f64, gap_percent: f64) -> f64 {
    local / (1.0 + gap_percent / 100.0)
}
