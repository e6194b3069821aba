//! Interchangeable relaxations of the trilinear terms V_l·V_m·cos θ and
//! V_l·V_m·sin θ, selected by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{mf_trilinear, nested_mccormick, EnvelopeError, TrilinearEnvelope, TrilinearTerm};

pub trait TrilinearRelaxation: Send + Sync {
    fn name(&self) -> &'static str;
    fn relax(&self, term: &TrilinearTerm) -> Result<TrilinearEnvelope, EnvelopeError>;
}

pub struct NestedMcCormick;

impl TrilinearRelaxation for NestedMcCormick {
    fn name(&self) -> &'static str {
        "nested-mccormick"
    }

    fn relax(&self, term: &TrilinearTerm) -> Result<TrilinearEnvelope, EnvelopeError> {
        Ok(nested_mccormick(term))
    }
}

pub struct MeyerFloudas;

impl TrilinearRelaxation for MeyerFloudas {
    fn name(&self) -> &'static str {
        "meyer-floudas"
    }

    fn relax(&self, term: &TrilinearTerm) -> Result<TrilinearEnvelope, EnvelopeError> {
        mf_trilinear(term)
    }
}

/// Meyer–Floudas hull facets on (V_l, V_m, z) together with the nested
/// McCormick facets on (w_lm, z). The product stays tied to w_lm, so the
/// relaxation is never weaker than nested McCormick inside a full model
/// where w_lm carries further constraints.
pub struct MeyerFloudasLinked;

impl TrilinearRelaxation for MeyerFloudasLinked {
    fn name(&self) -> &'static str {
        "meyer-floudas-linked"
    }

    fn relax(&self, term: &TrilinearTerm) -> Result<TrilinearEnvelope, EnvelopeError> {
        let mut env = mf_trilinear(term)?;
        env.facets.extend(nested_mccormick(term).facets);
        Ok(env)
    }
}

#[derive(Clone, Default)]
pub struct TrilinearRegistry {
    entries: BTreeMap<&'static str, Arc<dyn TrilinearRelaxation>>,
}

impl TrilinearRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn builtin() -> Self {
        let mut r = Self::new();
        r.register(NestedMcCormick);
        r.register(MeyerFloudas);
        r.register(MeyerFloudasLinked);
        r
    }

    pub fn register<R: TrilinearRelaxation + 'static>(&mut self, relaxation: R) {
        self.entries.insert(relaxation.name(), Arc::new(relaxation));
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn TrilinearRelaxation>> {
        self.entries.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_names() {
        let r = TrilinearRegistry::builtin();
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["meyer-floudas", "meyer-floudas-linked", "nested-mccormick"]);
        assert!(r.get("meyer-floudas").is_some());
        assert!(r.get("octagon").is_none());
    }
}
