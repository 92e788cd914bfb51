//! Streaming ensembles: online bagging, adaptive random forest (and its
//! random-subspace variant) and a chunk-weighted ensemble.

mod arf;
mod bagging;
mod chunk;

pub use arf::{AdaptiveRandomForest, ArfConfig, ArfMode, Replacement};
pub use bagging::{BaggingConfig, OzaBagging};
pub use chunk::{
    chunk_weight, member_mse, reference_mse, ChunkConfig, ChunkEnsemble, WEIGHT_FLOOR,
};

use std::sync::Arc;

use crate::error::Result;
use crate::instance::Prediction;
use crate::learner::{normalize_proba, Learner};
use crate::rng::StreamRng;

/// Builds a fresh, unfitted member learner from a seed.
pub type LearnerFactory = Arc<dyn Fn(u64) -> Result<Box<dyn Learner>> + Send + Sync>;

/// Poisson(`lambda`) variate by Knuth's product method; large rates are
/// split into independent chunks of at most 30.
pub fn poisson_draw(lambda: f64, rng: &mut StreamRng) -> u32 {
    if !(lambda > 0.0) {
        return 0;
    }
    let mut remaining = lambda;
    let mut total = 0u32;
    while remaining > 0.0 {
        let part = remaining.min(30.0);
        remaining -= part;
        let limit = (-part).exp();
        let mut product = rng.uniform();
        let mut k = 0u32;
        while product > limit {
            k += 1;
            product *= rng.uniform();
        }
        total += k;
    }
    total
}

/// Weighted average of member probability vectors. Zero-weight members are
/// excluded; if every weight is zero the plain average is used.
pub fn ensemble_predict(probas: &[Vec<f64>], weights: &[f64]) -> Prediction {
    debug_assert_eq!(probas.len(), weights.len());
    let n = probas.first().map_or(0, Vec::len);
    let total: f64 = weights.iter().filter(|w| **w > 0.0).sum();
    let uniform_weights = !(total > 0.0 && total.is_finite());
    let active: Vec<usize> = (0..probas.len())
        .filter(|&i| uniform_weights || weights[i] > 0.0)
        .collect();
    if let [only] = active[..] {
        // Members already satisfy the proba contract; renormalizing would
        // perturb the last bits.
        return Prediction::from_proba(probas[only].clone());
    }
    let mut acc = vec![0.0; n];
    for (p, &w) in probas.iter().zip(weights) {
        let w = if uniform_weights { 1.0 } else { w.max(0.0) };
        if w == 0.0 {
            continue;
        }
        for (a, v) in acc.iter_mut().zip(p) {
            *a += w * v;
        }
    }
    Prediction::from_proba(normalize_proba(acc))
}
