use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Instance, Prediction};

/// Static capability flags of a learner family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LearnerCaps {
    pub supports_multiclass: bool,
    pub supports_regression: bool,
    pub drift_adaptive: bool,
}

/// Incremental learner contract.
///
/// `fit` performs the initial training on a labeled batch; after that,
/// `partial_fit` consumes exactly one labeled instance per call. Predictions
/// take `&self` and never change observable state.
pub trait Learner: Send {
    fn caps(&self) -> LearnerCaps;

    fn fit(&mut self, batch: &[Instance]) -> Result<()>;

    fn partial_fit(&mut self, instance: &Instance) -> Result<()>;

    /// Per-class probabilities. Regression learners return `Unsupported`.
    fn predict_proba(&self, instance: &Instance) -> Result<Vec<f64>>;

    fn predict(&self, instance: &Instance) -> Result<Prediction> {
        Ok(Prediction::from_proba(self.predict_proba(instance)?))
    }

    fn is_fitted(&self) -> bool;

    /// Number of instances consumed by `fit` and `partial_fit`.
    fn n_seen(&self) -> u64;
}

/// Index of the largest entry; the smallest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Clamps negatives to zero and rescales to unit sum. A vector whose sum is
/// zero or not finite becomes uniform.
pub fn normalize_proba(mut proba: Vec<f64>) -> Vec<f64> {
    if proba.is_empty() {
        return proba;
    }
    for p in proba.iter_mut() {
        if !(*p > 0.0) {
            *p = 0.0;
        }
    }
    let sum: f64 = proba.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        for p in proba.iter_mut() {
            *p /= sum;
        }
    } else {
        let u = 1.0 / proba.len() as f64;
        proba.iter_mut().for_each(|p| *p = u);
    }
    proba
}

pub(crate) fn check_batch(batch: &[Instance]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidPretrain("empty batch".into()));
    }
    for inst in batch {
        inst.require_label()?;
    }
    Ok(())
}
