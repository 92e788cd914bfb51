//! Adaptive random forest.
//!
//! Every member is a Hoeffding tree restricted to a random feature subset,
//! trained with Poisson(6) instance weights and watched by its own DDM fed
//! with the member's prequential error bits. In ARF mode a warning starts a
//! background tree that replaces the member on drift; in SRP mode a drifting
//! member is replaced by a fresh tree on a newly drawn subset.

use serde::Deserialize;

use super::{ensemble_predict, poisson_draw};
use crate::drift::{Ddm, DdmConfig, DriftDetector, DriftLevel};
use crate::error::{Error, Result};
use crate::instance::{Instance, Prediction, StreamSchema, Target};
use crate::learner::{check_batch, Learner, LearnerCaps};
use crate::learners::{HoeffdingTree, HtConfig, LeafPrediction};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ArfMode {
    #[default]
    Arf,
    Srp,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ArfConfig {
    pub mode: ArfMode,
    pub n_members: usize,
    pub lambda: f64,
    /// Fraction of features per member; `None` means `ceil(sqrt(d))`
    /// features in ARF mode and 0.6 in SRP mode.
    pub subspace_fraction: Option<f64>,
    pub tree: HtConfig,
    pub detector: DdmConfig,
    /// Replaces the Poisson draw with a constant (test hook).
    pub fixed_weight: Option<u32>,
}

impl Default for ArfConfig {
    fn default() -> Self {
        Self {
            mode: ArfMode::Arf,
            n_members: 10,
            lambda: 6.0,
            subspace_fraction: None,
            tree: HtConfig {
                grace_period: 50,
                delta: 0.01,
                tie_threshold: 0.05,
                max_depth: None,
                leaf_prediction: LeafPrediction::NaiveBayesAdaptive,
            },
            detector: DdmConfig::default(),
            fixed_weight: None,
        }
    }
}

impl ArfConfig {
    pub fn srp() -> Self {
        Self {
            mode: ArfMode::Srp,
            ..Self::default()
        }
    }

    fn subspace_size(&self, n_features: usize) -> usize {
        let k = match (self.subspace_fraction, self.mode) {
            (Some(f), _) => (f * n_features as f64).ceil() as usize,
            (None, ArfMode::Arf) => (n_features as f64).sqrt().ceil() as usize,
            (None, ArfMode::Srp) => (0.6 * n_features as f64).ceil() as usize,
        };
        k.clamp(1, n_features)
    }
}

/// A member replaced at stream index `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Replacement {
    pub step: u64,
    pub member: usize,
    /// True when a background tree was promoted.
    pub promoted: bool,
}

#[derive(Debug, Clone)]
struct Grown {
    tree: HoeffdingTree,
    mask: Vec<usize>,
}

impl Grown {
    fn project(&self, inst: &Instance) -> Instance {
        Instance::new(
            inst.index,
            self.mask.iter().map(|&f| inst.features[f]).collect(),
            inst.label,
        )
    }
}

#[derive(Debug, Clone)]
struct Member {
    current: Grown,
    background: Option<Grown>,
    detector: Ddm,
    correct: f64,
    evaluated: f64,
}

impl Member {
    fn accuracy(&self) -> f64 {
        if self.evaluated > 0.0 {
            self.correct / self.evaluated
        } else {
            0.0
        }
    }
}

pub struct AdaptiveRandomForest {
    schema: StreamSchema,
    cfg: ArfConfig,
    n_classes: usize,
    members: Vec<Member>,
    rng: StreamRng,
    replacements: Vec<Replacement>,
    warnings: u64,
    fitted: bool,
    n_seen: u64,
}

impl AdaptiveRandomForest {
    pub fn new(schema: StreamSchema, cfg: ArfConfig, seed: u64) -> Result<Self> {
        let n_classes = schema
            .n_classes()
            .ok_or_else(|| Error::Unsupported("ARF does not support regression".into()))?;
        if cfg.n_members == 0 {
            return Err(Error::InvalidArgument("n_members must be positive".into()));
        }
        if !(cfg.lambda > 0.0 && cfg.lambda.is_finite()) {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        if let Some(f) = cfg.subspace_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "subspace_fraction {f} outside (0, 1]"
                )));
            }
        }
        cfg.tree.validate()?;
        let mut arf = Self {
            schema,
            n_classes,
            members: Vec::new(),
            rng: StreamRng::new(seed),
            replacements: Vec::new(),
            warnings: 0,
            fitted: false,
            n_seen: 0,
            cfg,
        };
        arf.members = (0..arf.cfg.n_members)
            .map(|_| {
                Ok(Member {
                    current: arf.grow()?,
                    background: None,
                    detector: Ddm::new(arf.cfg.detector.clone()),
                    correct: 0.0,
                    evaluated: 0.0,
                })
            })
            .collect::<Result<_>>()?;
        Ok(arf)
    }

    fn grow(&mut self) -> Result<Grown> {
        let d = self.schema.n_features;
        let mask = self.rng.sample_indices(d, self.cfg.subspace_size(d));
        let schema = StreamSchema::classification(mask.len(), self.n_classes);
        Ok(Grown {
            tree: HoeffdingTree::fresh(schema, self.cfg.tree.clone())?,
            mask,
        })
    }

    pub fn replacements(&self) -> &[Replacement] {
        &self.replacements
    }

    pub fn warnings(&self) -> u64 {
        self.warnings
    }

    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    /// Feature subsets of the current members.
    pub fn masks(&self) -> Vec<Vec<usize>> {
        self.members
            .iter()
            .map(|m| m.current.mask.clone())
            .collect()
    }

    /// Total node count over the current members.
    pub fn total_nodes(&self) -> usize {
        self.members.iter().map(|m| m.current.tree.n_nodes()).sum()
    }

    fn weight(&mut self) -> u32 {
        match self.cfg.fixed_weight {
            Some(k) => k,
            None => poisson_draw(self.cfg.lambda, &mut self.rng),
        }
    }
}

impl Learner for AdaptiveRandomForest {
    fn caps(&self) -> LearnerCaps {
        LearnerCaps {
            supports_multiclass: true,
            supports_regression: false,
            drift_adaptive: true,
        }
    }

    fn fit(&mut self, batch: &[Instance]) -> Result<()> {
        check_batch(batch)?;
        for inst in batch {
            self.schema.check(inst)?;
            inst.require_class()?;
        }
        for m in &mut self.members {
            let projected: Vec<Instance> = batch.iter().map(|i| m.current.project(i)).collect();
            m.current.tree.fit(&projected)?;
            m.background = None;
            m.detector.reset();
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
        let class = instance.require_class()?;
        for i in 0..self.members.len() {
            let k = self.weight();
            let m = &mut self.members[i];
            let projected = m.current.project(instance);
            let predicted = m.current.tree.predict(&projected)?.label;
            let error = predicted != Target::Class(class);
            m.evaluated += 1.0;
            if !error {
                m.correct += 1.0;
            }
            for _ in 0..k {
                m.current.tree.partial_fit(&projected)?;
            }
            if let Some(bg) = &mut m.background {
                let p = bg.project(instance);
                for _ in 0..k {
                    bg.tree.partial_fit(&p)?;
                }
            }
            let level = m.detector.update_error(error);
            match (self.cfg.mode, level) {
                (ArfMode::Arf, DriftLevel::Warning) => {
                    if self.members[i].background.is_none() {
                        self.warnings += 1;
                        let bg = self.grow()?;
                        self.members[i].background = Some(bg);
                    }
                }
                (ArfMode::Arf, DriftLevel::Stable) => {
                    self.members[i].background = None;
                }
                (_, DriftLevel::Drift) => {
                    let (next, promoted) = match self.members[i].background.take() {
                        Some(bg) if self.cfg.mode == ArfMode::Arf => (bg, true),
                        _ => (self.grow()?, false),
                    };
                    let m = &mut self.members[i];
                    m.current = next;
                    m.detector.reset();
                    m.correct = 0.0;
                    m.evaluated = 0.0;
                    self.replacements.push(Replacement {
                        step: instance.index,
                        member: i,
                        promoted,
                    });
                }
                (ArfMode::Srp, _) => {}
            }
        }
        self.n_seen += 1;
        Ok(())
    }

    fn predict_proba(&self, instance: &Instance) -> Result<Vec<f64>> {
        Ok(self.predict(instance)?.proba)
    }

    /// Members vote with weights equal to their prequential accuracy since
    /// they were (re)created.
    fn predict(&self, instance: &Instance) -> Result<Prediction> {
        if !self.fitted {
            return Err(Error::NotFitted);
        }
        self.schema.check(&instance.unlabeled())?;
        let mut probas = Vec::with_capacity(self.members.len());
        let mut weights = Vec::with_capacity(self.members.len());
        for m in &self.members {
            probas.push(m.current.tree.predict_proba(&m.current.project(instance))?);
            weights.push(m.accuracy());
        }
        Ok(ensemble_predict(&probas, &weights))
    }

    fn is_fitted(&self) -> bool {
        self.fitted
    }

    fn n_seen(&self) -> u64 {
        self.n_seen
    }
}
