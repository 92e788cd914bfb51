use serde::Deserialize;

use crate::error::{Error, Result};
use crate::instance::{Instance, StreamSchema};
use crate::learner::{check_batch, normalize_proba, Learner, LearnerCaps};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OgdConfig {
    pub learning_rate: f64,
    pub l2: f64,
    /// Width of the tanh hidden layer; 0 means plain softmax regression.
    pub hidden: usize,
    /// Passes over the pretraining batch performed by `fit`.
    pub fit_epochs: usize,
}

impl Default for OgdConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            l2: 0.0,
            hidden: 0,
            fit_epochs: 10,
        }
    }
}

impl OgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(
                "learning_rate must be finite and >= 0".into(),
            ));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidArgument("l2 must be finite and >= 0".into()));
        }
        if self.fit_epochs == 0 {
            return Err(Error::InvalidArgument("fit_epochs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct HiddenLayer {
    /// H x d, row-major.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

/// Softmax classifier, optionally behind one tanh hidden layer.
///
/// Parameters flatten in the order: hidden weights, hidden bias, output
/// weights (C x m, row-major, m = H or d), output bias.
#[derive(Debug, Clone, PartialEq)]
pub struct OgdModel {
    n_features: usize,
    n_classes: usize,
    hidden: Option<HiddenLayer>,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl OgdModel {
    /// All-zero linear model.
    pub fn zeros(n_features: usize, n_classes: usize) -> Self {
        Self {
            n_features,
            n_classes,
            hidden: None,
            weights: vec![0.0; n_classes * n_features],
            bias: vec![0.0; n_classes],
        }
    }

    /// Model with `hidden` tanh units (Glorot-uniform init) and zero output
    /// layer; `hidden == 0` gives [`OgdModel::zeros`].
    pub fn new(n_features: usize, n_classes: usize, hidden: usize, rng: &mut StreamRng) -> Self {
        if hidden == 0 {
            return Self::zeros(n_features, n_classes);
        }
        let a = (6.0 / (n_features + hidden) as f64).sqrt();
        let weights = (0..hidden * n_features)
            .map(|_| rng.uniform_range(-a, a))
            .collect();
        Self {
            n_features,
            n_classes,
            hidden: Some(HiddenLayer {
                weights,
                bias: vec![0.0; hidden],
            }),
            weights: vec![0.0; n_classes * hidden],
            bias: vec![0.0; n_classes],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_params(&self) -> usize {
        self.hidden
            .as_ref()
            .map_or(0, |h| h.weights.len() + h.bias.len())
            + self.weights.len()
            + self.bias.len()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        if let Some(h) = &self.hidden {
            out.extend_from_slice(&h.weights);
            out.extend_from_slice(&h.bias);
        }
        out.extend_from_slice(&self.weights);
        out.extend_from_slice(&self.bias);
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::InvalidArgument(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                params.len()
            )));
        }
        let mut rest = params;
        let mut take = |dst: &mut Vec<f64>| {
            let (head, tail) = rest.split_at(dst.len());
            dst.copy_from_slice(head);
            rest = tail;
        };
        if let Some(h) = &mut self.hidden {
            take(&mut h.weights);
            take(&mut h.bias);
        }
        take(&mut self.weights);
        take(&mut self.bias);
        Ok(())
    }

    fn input_width(&self) -> usize {
        self.hidden
            .as_ref()
            .map_or(self.n_features, |h| h.bias.len())
    }

    /// Hidden activations (or `x` itself) and output logits.
    fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let act = match &self.hidden {
            Some(h) => h
                .bias
                .iter()
                .enumerate()
                .map(|(j, b)| {
                    let row = &h.weights[j * self.n_features..(j + 1) * self.n_features];
                    (row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b).tanh()
                })
                .collect(),
            None => x.to_vec(),
        };
        let m = act.len();
        let logits = (0..self.n_classes)
            .map(|c| {
                let row = &self.weights[c * m..(c + 1) * m];
                row.iter().zip(&act).map(|(w, v)| w * v).sum::<f64>() + self.bias[c]
            })
            .collect();
        (act, logits)
    }

    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.forward(x).1)
    }

    /// Cross-entropy of class `y` plus `l2 / 2 * ||theta||^2`.
    pub fn loss(&self, x: &[f64], y: usize, l2: f64) -> f64 {
        let (_, logits) = self.forward(x);
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
        let reg: f64 = self.params().iter().map(|p| p * p).sum();
        lse - logits[y] + 0.5 * l2 * reg
    }

    /// Gradient of [`OgdModel::loss`], flattened like [`OgdModel::params`].
    pub fn gradient(&self, x: &[f64], y: usize, l2: f64) -> Vec<f64> {
        let (act, logits) = self.forward(x);
        let mut dz = softmax(&logits);
        dz[y] -= 1.0;
        let m = self.input_width();

        let mut grad = Vec::with_capacity(self.n_params());
        if let Some(h) = &self.hidden {
            let da: Vec<f64> = (0..m)
                .map(|j| {
                    let back: f64 = (0..self.n_classes)
                        .map(|c| self.weights[c * m + j] * dz[c])
                        .sum();
                    back * (1.0 - act[j] * act[j])
                })
                .collect();
            for dj in &da {
                grad.extend(x.iter().map(|v| dj * v));
            }
            grad.extend_from_slice(&da);
            debug_assert_eq!(grad.len(), h.weights.len() + h.bias.len());
        }
        for dc in &dz {
            grad.extend(act.iter().map(|a| dc * a));
        }
        grad.extend_from_slice(&dz);

        if l2 > 0.0 {
            for (g, p) in grad.iter_mut().zip(self.params()) {
                *g += l2 * p;
            }
        }
        grad
    }

    /// One gradient step `theta <- theta - lr * grad`. On a non-finite
    /// gradient or result the model is left unchanged.
    pub fn update(&mut self, x: &[f64], y: usize, learning_rate: f64, l2: f64) -> Result<()> {
        let grad = self.gradient(x, y, l2);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric("non-finite gradient".into()));
        }
        let next: Vec<f64> = self
            .params()
            .iter()
            .zip(&grad)
            .map(|(p, g)| p - learning_rate * g)
            .collect();
        if next.iter().any(|p| !p.is_finite()) {
            return Err(Error::Numeric("parameter overflow after update".into()));
        }
        self.set_params(&next)
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    normalize_proba(exps)
}

/// Online gradient descent learner over an [`OgdModel`].
#[derive(Debug, Clone)]
pub struct OgdLearner {
    schema: StreamSchema,
    cfg: OgdConfig,
    model: OgdModel,
    fitted: bool,
    n_seen: u64,
}

impl OgdLearner {
    pub fn new(schema: StreamSchema, cfg: OgdConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let n_classes = super::require_classification(&schema, "OGD")?;
        let mut rng = StreamRng::new(seed);
        let model = OgdModel::new(schema.n_features, n_classes, cfg.hidden, &mut rng);
        Ok(Self {
            schema,
            cfg,
            model,
            fitted: false,
            n_seen: 0,
        })
    }

    pub fn model(&self) -> &OgdModel {
        &self.model
    }

    pub fn config(&self) -> &OgdConfig {
        &self.cfg
    }

    fn step(&mut self, inst: &Instance) -> Result<()> {
        self.schema.check(inst)?;
        let y = inst.require_class()?;
        self.model
            .update(&inst.features, y, self.cfg.learning_rate, self.cfg.l2)
    }
}

impl Learner for OgdLearner {
    fn caps(&self) -> LearnerCaps {
        LearnerCaps {
            supports_multiclass: true,
            supports_regression: false,
            drift_adaptive: false,
        }
    }

    fn fit(&mut self, batch: &[Instance]) -> Result<()> {
        check_batch(batch)?;
        for inst in batch {
            self.schema.check(inst)?;
            inst.require_class()?;
        }
        for _ in 0..self.cfg.fit_epochs {
            for inst in batch {
                self.step(inst)?;
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
        self.step(instance)?;
        self.n_seen += 1;
        Ok(())
    }

    fn predict_proba(&self, instance: &Instance) -> Result<Vec<f64>> {
        if !self.fitted {
            return Err(Error::NotFitted);
        }
        self.schema.check(&instance.unlabeled())?;
        Ok(self.model.proba(&instance.features))
    }

    fn is_fitted(&self) -> bool {
        self.fitted
    }

    fn n_seen(&self) -> u64 {
        self.n_seen
    }
}
