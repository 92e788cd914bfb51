use serde::Deserialize;

use super::{DriftParams, DriftSchedule, Stream};
use crate::error::{Error, Result};
use crate::instance::{Instance, StreamSchema, Target};
use crate::rng::StreamRng;

/// SEA concept: class 1 iff `f0 + f1 <= threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeaConcept {
    pub threshold: f64,
    pub noise_rate: f64,
}

impl SeaConcept {
    pub fn new(threshold: f64, noise_rate: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 20.0) {
            return Err(Error::InvalidArgument(format!(
                "SEA threshold {threshold} outside (0, 20)"
            )));
        }
        if !(0.0..0.5).contains(&noise_rate) {
            return Err(Error::InvalidArgument(format!(
                "noise rate {noise_rate} outside [0, 0.5)"
            )));
        }
        Ok(Self {
            threshold,
            noise_rate,
        })
    }
}

pub fn sea_label(f1: f64, f2: f64, threshold: f64) -> usize {
    usize::from(f1 + f2 <= threshold)
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SeaConfig {
    pub theta: f64,
    pub theta_after: Option<f64>,
    pub noise_rate: f64,
    #[serde(flatten)]
    pub drift: DriftParams,
}

impl Default for SeaConfig {
    fn default() -> Self {
        Self {
            theta: 8.0,
            theta_after: None,
            noise_rate: 0.0,
            drift: DriftParams::default(),
        }
    }
}

/// Three features uniform on `[0, 10)`; only the first two are informative.
#[derive(Debug, Clone)]
pub struct SeaStream {
    schema: StreamSchema,
    schedule: DriftSchedule<SeaConcept>,
    rng: StreamRng,
    t: u64,
}

impl SeaStream {
    pub fn new(schedule: DriftSchedule<SeaConcept>, seed: u64) -> Self {
        Self {
            schema: StreamSchema::classification(3, 2),
            schedule,
            rng: StreamRng::new(seed),
            t: 0,
        }
    }

    pub fn from_config(cfg: &SeaConfig, seed: u64) -> Result<Self> {
        let before = SeaConcept::new(cfg.theta, cfg.noise_rate)?;
        let after = SeaConcept::new(cfg.theta_after.unwrap_or(cfg.theta), cfg.noise_rate)?;
        let schedule = match cfg.drift.drift_position {
            Some(position) => DriftSchedule {
                position,
                width: cfg.drift.drift_width,
                before,
                after,
            },
            None => DriftSchedule::stationary(before),
        };
        Ok(Self::new(schedule, seed))
    }

    pub fn schedule(&self) -> &DriftSchedule<SeaConcept> {
        &self.schedule
    }
}

impl Stream for SeaStream {
    fn schema(&self) -> &StreamSchema {
        &self.schema
    }

    fn next_instance(&mut self) -> Result<Option<Instance>> {
        let features: Vec<f64> = (0..3).map(|_| self.rng.uniform_range(0.0, 10.0)).collect();
        let u_mix = self.rng.uniform();
        let u_noise = self.rng.uniform();
        let concept = *self.schedule.select(self.t, u_mix);
        let mut label = sea_label(features[0], features[1], concept.threshold);
        if u_noise < concept.noise_rate {
            label = 1 - label;
        }
        let inst = Instance::new(self.t, features, Some(Target::Class(label)));
        self.t += 1;
        Ok(Some(inst))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sea_boundary_is_inclusive() {
        assert_eq!(sea_label(3.0, 4.0, 8.0), 1);
        assert_eq!(sea_label(6.0, 5.0, 8.0), 0);
        assert_eq!(sea_label(4.0, 4.0, 8.0), 1);
    }

    #[test]
    fn concept_parameters_are_validated() {
        assert!(SeaConcept::new(0.0, 0.0).is_err());
        assert!(SeaConcept::new(20.0, 0.0).is_err());
        assert!(SeaConcept::new(8.0, 0.5).is_err());
        assert!(SeaConcept::new(8.0, 0.1).is_ok());
    }

    #[test]
    fn same_seed_same_first_instance() {
        let cfg = SeaConfig::default();
        let a = SeaStream::from_config(&cfg, 7)
            .unwrap()
            .next_instance()
            .unwrap();
        let b = SeaStream::from_config(&cfg, 7)
            .unwrap()
            .next_instance()
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.unwrap().index, 0);
    }

    #[test]
    fn noise_free_abrupt_drift_follows_each_concept_exactly() {
        let cfg = SeaConfig {
            theta: 8.0,
            theta_after: Some(9.5),
            noise_rate: 0.0,
            drift: DriftParams {
                drift_position: Some(500),
                drift_width: 0,
            },
        };
        let mut s = SeaStream::from_config(&cfg, 11).unwrap();
        for inst in s.take_instances(1_000).unwrap() {
            let theta = if inst.index < 500 { 8.0 } else { 9.5 };
            let expected = sea_label(inst.features[0], inst.features[1], theta);
            assert_eq!(inst.label, Some(Target::Class(expected)));
            assert!(inst.features.iter().all(|f| (0.0..10.0).contains(f)));
        }
    }
}
