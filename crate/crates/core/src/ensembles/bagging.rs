use serde::Deserialize;

use super::{ensemble_predict, poisson_draw, LearnerFactory};
use crate::error::{Error, Result};
use crate::instance::{Instance, Prediction, StreamSchema};
use crate::learner::{check_batch, Learner, LearnerCaps};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BaggingConfig {
    pub n_members: usize,
    pub lambda: f64,
    /// Replaces the Poisson draw with a constant (test hook).
    pub fixed_weight: Option<u32>,
}

impl Default for BaggingConfig {
    fn default() -> Self {
        Self {
            n_members: 10,
            lambda: 1.0,
            fixed_weight: None,
        }
    }
}

/// Oza online bagging: each member sees every instance `k ~ Poisson(lambda)`
/// times.
pub struct OzaBagging {
    schema: StreamSchema,
    cfg: BaggingConfig,
    members: Vec<Box<dyn Learner>>,
    caps: LearnerCaps,
    rng: StreamRng,
    fitted: bool,
    n_seen: u64,
}

impl OzaBagging {
    pub fn new(
        schema: StreamSchema,
        cfg: BaggingConfig,
        factory: LearnerFactory,
        seed: u64,
    ) -> Result<Self> {
        if cfg.n_members == 0 {
            return Err(Error::InvalidArgument("n_members must be positive".into()));
        }
        if !(cfg.lambda > 0.0 && cfg.lambda.is_finite()) {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        let root = StreamRng::new(seed);
        let members = (0..cfg.n_members)
            .map(|i| factory(StreamRng::derive_seed(seed, "bagging-member", i as u64)))
            .collect::<Result<Vec<_>>>()?;
        let base = members[0].caps();
        Ok(Self {
            schema,
            caps: LearnerCaps {
                supports_multiclass: base.supports_multiclass,
                supports_regression: base.supports_regression,
                drift_adaptive: false,
            },
            cfg,
            members,
            rng: root.split("poisson", 0),
            fitted: false,
            n_seen: 0,
        })
    }

    pub fn members(&self) -> &[Box<dyn Learner>] {
        &self.members
    }
}

impl Learner for OzaBagging {
    fn caps(&self) -> LearnerCaps {
        self.caps
    }

    fn fit(&mut self, batch: &[Instance]) -> Result<()> {
        check_batch(batch)?;
        for m in &mut self.members {
            m.fit(batch)?;
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
        instance.require_label()?;
        for m in &mut self.members {
            let k = match self.cfg.fixed_weight {
                Some(k) => k,
                None => poisson_draw(self.cfg.lambda, &mut self.rng),
            };
            for _ in 0..k {
                m.partial_fit(instance)?;
            }
        }
        self.n_seen += 1;
        Ok(())
    }

    fn predict_proba(&self, instance: &Instance) -> Result<Vec<f64>> {
        Ok(self.predict(instance)?.proba)
    }

    fn predict(&self, instance: &Instance) -> Result<Prediction> {
        if !self.fitted {
            return Err(Error::NotFitted);
        }
        if !self.schema.is_classification() {
            let sum = self
                .members
                .iter()
                .map(|m| m.predict(instance).map(|p| p.label.value()))
                .sum::<Result<f64>>()?;
            return Ok(Prediction::real(sum / self.members.len() as f64));
        }
        let probas = self
            .members
            .iter()
            .map(|m| m.predict_proba(instance))
            .collect::<Result<Vec<_>>>()?;
        Ok(ensemble_predict(&probas, &vec![1.0; probas.len()]))
    }

    fn is_fitted(&self) -> bool {
        self.fitted
    }

    fn n_seen(&self) -> u64 {
        self.n_seen
    }
}
