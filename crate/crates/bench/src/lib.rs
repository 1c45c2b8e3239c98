//! Inputs shared by the benchmarks.

use dsine_core::{CoefficientSequence, Preset};

pub fn oscillating() -> CoefficientSequence {
    Preset::OscillatingQuadratic.build().expect("preset builds")
}

pub fn mod3() -> CoefficientSequence {
    Preset::Mod3LogProduct.build().expect("preset builds")
}

/// The same values with the separable fast paths switched off.
pub fn dense(c: &CoefficientSequence) -> CoefficientSequence {
    c.without_separable()
}
