//! Chunk-based weighted ensemble.
//!
//! Labeled instances are buffered into chunks. When a chunk fills up, every
//! existing member is reweighted by how much better than a random predictor
//! it scores on the chunk, a new member is trained on it, and the weakest
//! member is dropped once the ensemble is over capacity.

use serde::Deserialize;

use super::{ensemble_predict, LearnerFactory};
use crate::error::{Error, Result};
use crate::instance::{Instance, Prediction, StreamSchema};
use crate::learner::{check_batch, Learner, LearnerCaps};
use crate::rng::StreamRng;

/// Weight given to a new member whose score is not above the reference.
pub const WEIGHT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ChunkConfig {
    pub chunk_size: usize,
    pub max_members: usize,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        Self {
            chunk_size: 500,
            max_members: 10,
        }
    }
}

/// `sum_c p(c) (1 - p(c))` over the chunk's class frequencies.
pub fn reference_mse(labels: &[usize], n_classes: usize) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let mut counts = vec![0.0; n_classes];
    for &c in labels {
        counts[c] += 1.0;
    }
    let n = labels.len() as f64;
    counts.iter().map(|c| (c / n) * (1.0 - c / n)).sum()
}

/// Mean of `(1 - p_i(y))^2` given each instance's true-class probability.
pub fn member_mse(true_class_proba: &[f64]) -> f64 {
    if true_class_proba.is_empty() {
        return 0.0;
    }
    true_class_proba
        .iter()
        .map(|p| (1.0 - p) * (1.0 - p))
        .sum::<f64>()
        / true_class_proba.len() as f64
}

pub fn chunk_weight(reference: f64, member: f64) -> f64 {
    (reference - member).max(0.0)
}

struct ChunkMember {
    learner: Box<dyn Learner>,
    weight: f64,
}

pub struct ChunkEnsemble {
    schema: StreamSchema,
    cfg: ChunkConfig,
    n_classes: usize,
    factory: LearnerFactory,
    seed: u64,
    buffer: Vec<Instance>,
    members: Vec<ChunkMember>,
    n_created: u64,
    fitted: bool,
    n_seen: u64,
}

impl ChunkEnsemble {
    pub fn new(
        schema: StreamSchema,
        cfg: ChunkConfig,
        factory: LearnerFactory,
        seed: u64,
    ) -> Result<Self> {
        let n_classes = schema.n_classes().ok_or_else(|| {
            Error::Unsupported("ChunkEnsemble does not support regression".into())
        })?;
        if cfg.chunk_size == 0 || cfg.max_members == 0 {
            return Err(Error::InvalidArgument(
                "chunk_size and max_members must be positive".into(),
            ));
        }
        Ok(Self {
            schema,
            n_classes,
            buffer: Vec::with_capacity(cfg.chunk_size),
            cfg,
            factory,
            seed,
            members: Vec::new(),
            n_created: 0,
            fitted: false,
            n_seen: 0,
        })
    }

    pub fn weights(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.weight).collect()
    }

    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    fn true_class_probas(learner: &dyn Learner, chunk: &[Instance]) -> Result<Vec<f64>> {
        chunk
            .iter()
            .map(|inst| {
                let y = inst.require_class()?;
                Ok(learner.predict_proba(inst)?[y])
            })
            .collect()
    }

    /// Reweights the members on the buffered chunk, adds a member trained on
    /// it and evicts the lowest-weight member (oldest on ties) when over
    /// capacity. Called automatically when the buffer fills.
    pub fn chunk_commit(&mut self) -> Result<()> {
        if self.buffer.is_empty() {
            return Ok(());
        }
        let chunk = std::mem::take(&mut self.buffer);
        let labels = chunk
            .iter()
            .map(Instance::require_class)
            .collect::<Result<Vec<_>>>()?;
        let reference = reference_mse(&labels, self.n_classes);
        for m in &mut self.members {
            let mse = member_mse(&Self::true_class_probas(m.learner.as_ref(), &chunk)?);
            m.weight = chunk_weight(reference, mse);
        }
        let seed = StreamRng::derive_seed(self.seed, "chunk-member", self.n_created);
        self.n_created += 1;
        let mut learner = (self.factory)(seed)?;
        learner.fit(&chunk)?;
        let mse = member_mse(&Self::true_class_probas(learner.as_ref(), &chunk)?);
        self.members.push(ChunkMember {
            learner,
            weight: chunk_weight(reference, mse).max(WEIGHT_FLOOR),
        });
        if self.members.len() > self.cfg.max_members {
            let worst = self
                .members
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.weight.total_cmp(&b.1.weight).then(a.0.cmp(&b.0)))
                .map(|(i, _)| i)
                .expect("non-empty");
            self.members.remove(worst);
        }
        self.buffer = Vec::with_capacity(self.cfg.chunk_size);
        Ok(())
    }
}

impl Learner for ChunkEnsemble {
    fn caps(&self) -> LearnerCaps {
        LearnerCaps {
            supports_multiclass: true,
            supports_regression: false,
            drift_adaptive: true,
        }
    }

    /// Commits every full chunk of the batch; a batch shorter than one chunk
    /// is committed as a short chunk so the ensemble can predict.
    fn fit(&mut self, batch: &[Instance]) -> Result<()> {
        check_batch(batch)?;
        for inst in batch {
            self.schema.check(inst)?;
            inst.require_class()?;
        }
        self.members.clear();
        self.buffer.clear();
        for chunk in batch.chunks(self.cfg.chunk_size) {
            self.buffer.extend_from_slice(chunk);
            if chunk.len() == self.cfg.chunk_size || self.members.is_empty() {
                self.chunk_commit()?;
            }
        }
        self.n_seen = batch.len() as u64;
        self.fitted = true;
        Ok(())
    }

    fn partial_fit(&mut self, instance: &Instance) -> Result<()> {
        if !self.fitted {
            return Err(Error::NotFitted);
        }
        self.schema.check(instance)?;
        instance.require_class()?;
        self.buffer.push(instance.clone());
        self.n_seen += 1;
        if self.buffer.len() >= self.cfg.chunk_size {
            self.chunk_commit()?;
        }
        Ok(())
    }

    fn predict_proba(&self, instance: &Instance) -> Result<Vec<f64>> {
        Ok(self.predict(instance)?.proba)
    }

    fn predict(&self, instance: &Instance) -> Result<Prediction> {
        if !self.fitted || self.members.is_empty() {
            return Err(Error::NotFitted);
        }
        self.schema.check(&instance.unlabeled())?;
        let probas = self
            .members
            .iter()
            .map(|m| m.learner.predict_proba(instance))
            .collect::<Result<Vec<_>>>()?;
        Ok(ensemble_predict(&probas, &self.weights()))
    }

    fn is_fitted(&self) -> bool {
        self.fitted
    }

    fn n_seen(&self) -> u64 {
        self.n_seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_formulas() {
        // perfect member
        assert_eq!(member_mse(&[1.0, 1.0, 1.0]), 0.0);
        let r = reference_mse(&[0, 1, 0, 1], 2);
        assert_eq!(r, 0.5);
        assert_eq!(chunk_weight(r, 0.0), r);
        // uniform member on a balanced binary chunk
        let m = member_mse(&[0.5; 4]);
        assert_eq!(m, 0.25);
        assert_eq!(chunk_weight(r, m), 0.25);
        // worse than random
        assert_eq!(chunk_weight(0.5, 0.7), 0.0);
        // single class chunk
        assert_eq!(reference_mse(&[1, 1, 1], 2), 0.0);
    }
}
