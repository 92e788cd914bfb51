use std::collections::VecDeque;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::instance::{Instance, LabelKind, Prediction, StreamSchema, Target};
use crate::learner::{argmax, check_batch, normalize_proba, Learner, LearnerCaps};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct KnnConfig {
    pub k: usize,
    pub capacity: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self {
            k: 5,
            capacity: 1000,
        }
    }
}

/// FIFO window of labeled points, oldest first.
#[derive(Debug, Clone)]
pub struct KnnBuffer {
    capacity: usize,
    k: usize,
    window: VecDeque<(Vec<f64>, Target)>,
}

impl KnnBuffer {
    pub fn new(k: usize, capacity: usize) -> Result<Self> {
        if k == 0 || capacity == 0 {
            return Err(Error::InvalidArgument(
                "k and capacity must be positive".into(),
            ));
        }
        Ok(Self {
            capacity,
            k,
            window: VecDeque::with_capacity(capacity),
        })
    }

    pub fn push(&mut self, features: Vec<f64>, label: Target) {
        if self.window.len() == self.capacity {
            self.window.pop_front();
        }
        self.window.push_back((features, label));
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Vec<f64>, Target)> {
        self.window.iter()
    }

    /// Window positions of the `min(k, len)` nearest points by squared
    /// Euclidean distance; equal distances keep the older point first.
    pub fn neighbors(&self, x: &[f64]) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = self
            .window
            .iter()
            .enumerate()
            .map(|(i, (f, _))| (squared_distance(f, x), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        dist.truncate(self.k.min(self.window.len()));
        dist.into_iter().map(|(_, i)| i).collect()
    }

    /// Vote fractions over `n_classes` among the nearest neighbors.
    pub fn vote(&self, x: &[f64], n_classes: usize) -> Result<Vec<f64>> {
        if self.window.is_empty() {
            return Err(Error::NotFitted);
        }
        let mut votes = vec![0.0; n_classes];
        for i in self.neighbors(x) {
            if let Target::Class(c) = self.window[i].1 {
                votes[c] += 1.0;
            }
        }
        Ok(normalize_proba(votes))
    }

    pub fn mean_target(&self, x: &[f64]) -> Result<f64> {
        if self.window.is_empty() {
            return Err(Error::NotFitted);
        }
        let idx = self.neighbors(x);
        Ok(idx.iter().map(|&i| self.window[i].1.value()).sum::<f64>() / idx.len() as f64)
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Sliding-window k-nearest-neighbors; classification or regression
/// depending on the schema.
#[derive(Debug, Clone)]
pub struct KnnLearner {
    schema: StreamSchema,
    buffer: KnnBuffer,
    fitted: bool,
    n_seen: u64,
}

impl KnnLearner {
    pub fn new(schema: StreamSchema, cfg: KnnConfig) -> Result<Self> {
        Ok(Self {
            schema,
            buffer: KnnBuffer::new(cfg.k, cfg.capacity)?,
            fitted: false,
            n_seen: 0,
        })
    }

    pub fn buffer(&self) -> &KnnBuffer {
        &self.buffer
    }

    fn learn(&mut self, inst: &Instance) -> Result<()> {
        self.schema.check(inst)?;
        let label = inst.require_label()?;
        self.buffer.push(inst.features.clone(), label);
        self.n_seen += 1;
        Ok(())
    }
}

impl Learner for KnnLearner {
    fn caps(&self) -> LearnerCaps {
        LearnerCaps {
            supports_multiclass: true,
            supports_regression: true,
            drift_adaptive: false,
        }
    }

    fn fit(&mut self, batch: &[Instance]) -> Result<()> {
        check_batch(batch)?;
        for inst in batch {
            self.schema.check(inst)?;
        }
        for inst in batch {
            self.learn(inst)?;
        }
        self.fitted = true;
        Ok(())
    }

    fn partial_fit(&mut self, instance: &Instance) -> Result<()> {
        if !self.fitted {
            return Err(Error::NotFitted);
        }
        self.learn(instance)
    }

    fn predict_proba(&self, instance: &Instance) -> Result<Vec<f64>> {
        if !self.fitted {
            return Err(Error::NotFitted);
        }
        let LabelKind::Classification { n_classes } = self.schema.label_kind else {
            return Err(Error::Unsupported(
                "predict_proba on a regression kNN".into(),
            ));
        };
        self.schema.check(&instance.unlabeled())?;
        self.buffer.vote(&instance.features, n_classes)
    }

    fn predict(&self, instance: &Instance) -> Result<Prediction> {
        if !self.fitted {
            return Err(Error::NotFitted);
        }
        match self.schema.label_kind {
            LabelKind::Classification { .. } => {
                let proba = self.predict_proba(instance)?;
                Ok(Prediction {
                    label: Target::Class(argmax(&proba)),
                    proba,
                })
            }
            LabelKind::Regression => {
                self.schema.check(&instance.unlabeled())?;
                Ok(Prediction::real(
                    self.buffer.mean_target(&instance.features)?,
                ))
            }
        }
    }

    fn is_fitted(&self) -> bool {
        self.fitted
    }

    fn n_seen(&self) -> u64 {
        self.n_seen
    }
}
