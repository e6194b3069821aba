//! Named variant sets, in the column order of the comparison table.

use std::fmt;

use qcrelax_core::qcmodel::QcVariant;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantSpec {
    pub use_mf: bool,
    pub use_vdiff: bool,
    pub use_bt: bool,
}

pub const PRESETS: [(&str, VariantSpec); 6] = [
    ("all", VariantSpec::new(true, true, true)),
    ("no-mf", VariantSpec::new(false, true, true)),
    ("no-vdiff", VariantSpec::new(true, false, true)),
    ("no-mf-vdiff", VariantSpec::new(false, false, true)),
    ("no-bt", VariantSpec::new(true, true, false)),
    ("no-bt-mf-vdiff", VariantSpec::new(false, false, false)),
];

impl Default for VariantSpec {
    fn default() -> Self {
        VariantSpec::new(true, true, true)
    }
}

impl VariantSpec {
    pub const fn new(use_mf: bool, use_vdiff: bool, use_bt: bool) -> Self {
        VariantSpec {
            use_mf,
            use_vdiff,
            use_bt,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        PRESETS.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    pub fn relaxation(&self) -> QcVariant {
        QcVariant::new(self.use_mf, self.use_vdiff)
    }

    /// Preset name, or the list of removed features for the two flag
    /// combinations the table does not name.
    pub fn name(&self) -> String {
        if let Some((n, _)) = PRESETS.iter().find(|(_, v)| v == self) {
            return n.to_string();
        }
        let mut off = Vec::new();
        for (flag, name) in [(self.use_bt, "bt"), (self.use_mf, "mf"), (self.use_vdiff, "vdiff")] {
            if !flag {
                off.push(name);
            }
        }
        format!("no-{}", off.join("-"))
    }
}

impl fmt::Display for VariantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
