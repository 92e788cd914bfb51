use serde::Deserialize;

use super::{DriftParams, DriftSchedule, Stream};
use crate::error::{Error, Result};
use crate::instance::{Instance, StreamSchema, Target};
use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneConcept {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl HyperplaneConcept {
    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidArgument(
                "hyperplane weights are all zero".into(),
            ));
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "hyperplane parameters must be finite".into(),
            ));
        }
        Ok(Self { weights, bias })
    }

    /// Random weights in `[-1, 1]` with the bias centering the plane on the
    /// unit cube, so both classes are roughly balanced.
    pub fn random(n_features: usize, rng: &mut StreamRng) -> Self {
        loop {
            let weights: Vec<f64> = (0..n_features)
                .map(|_| rng.uniform_range(-1.0, 1.0))
                .collect();
            if weights.iter().any(|w| *w != 0.0) {
                let bias = -0.5 * weights.iter().sum::<f64>();
                return Self { weights, bias };
            }
        }
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::Schema(format!(
                "hyperplane of dimension {} applied to {} features",
                self.weights.len(),
                x.len()
            )));
        }
        Ok(self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias)
    }
}

/// 1 iff `w . x + b >= 0`.
pub fn hyperplane_label(x: &[f64], weights: &[f64], bias: f64) -> Result<usize> {
    if x.len() != weights.len() {
        return Err(Error::Schema(format!(
            "dimension mismatch: x has {}, w has {}",
            x.len(),
            weights.len()
        )));
    }
    let score: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias;
    Ok(usize::from(score >= 0.0))
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    #[default]
    Classification,
    Regression,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct HyperplaneConfig {
    pub n_features: usize,
    pub weights: Option<Vec<f64>>,
    pub bias: Option<f64>,
    pub weights_after: Option<Vec<f64>>,
    pub bias_after: Option<f64>,
    /// Label flip probability (classification).
    pub noise_rate: f64,
    /// Standard deviation of additive Gaussian noise (regression).
    pub noise_std: f64,
    pub task: Task,
    #[serde(flatten)]
    pub drift: DriftParams,
}

impl Default for HyperplaneConfig {
    fn default() -> Self {
        Self {
            n_features: 10,
            weights: None,
            bias: None,
            weights_after: None,
            bias_after: None,
            noise_rate: 0.0,
            noise_std: 0.1,
            task: Task::Classification,
            drift: DriftParams::default(),
        }
    }
}

/// Features uniform on `[0, 1)^d`; the label is the side of a hyperplane
/// (classification) or its signed distance plus noise (regression).
#[derive(Debug, Clone)]
pub struct HyperplaneStream {
    schema: StreamSchema,
    schedule: DriftSchedule<HyperplaneConcept>,
    task: Task,
    noise_rate: f64,
    noise_std: f64,
    rng: StreamRng,
    t: u64,
}

impl HyperplaneStream {
    pub fn from_config(cfg: &HyperplaneConfig, seed: u64) -> Result<Self> {
        let d = cfg.n_features;
        if d == 0 {
            return Err(Error::InvalidArgument("n_features must be positive".into()));
        }
        if !(0.0..0.5).contains(&cfg.noise_rate) {
            return Err(Error::InvalidArgument(format!(
                "noise rate {} outside [0, 0.5)",
                cfg.noise_rate
            )));
        }
        if !(cfg.noise_std >= 0.0 && cfg.noise_std.is_finite()) {
            return Err(Error::InvalidArgument(
                "noise_std must be finite and >= 0".into(),
            ));
        }
        let root = StreamRng::new(seed);
        let concept = |weights: &Option<Vec<f64>>, bias: Option<f64>, replica: u64| match weights {
            Some(w) => {
                if w.len() != d {
                    return Err(Error::InvalidArgument(format!(
                        "{} weights for {} features",
                        w.len(),
                        d
                    )));
                }
                let b = bias.unwrap_or(-0.5 * w.iter().sum::<f64>());
                HyperplaneConcept::new(w.clone(), b)
            }
            None => {
                let mut c = HyperplaneConcept::random(d, &mut root.split("weights", replica));
                if let Some(b) = bias {
                    c.bias = b;
                }
                Ok(c)
            }
        };
        let before = concept(&cfg.weights, cfg.bias, 0)?;
        let schedule = match cfg.drift.drift_position {
            Some(position) => DriftSchedule {
                position,
                width: cfg.drift.drift_width,
                after: concept(&cfg.weights_after, cfg.bias_after, 1)?,
                before,
            },
            None => DriftSchedule::stationary(before),
        };
        let schema = match cfg.task {
            Task::Classification => StreamSchema::classification(d, 2),
            Task::Regression => StreamSchema::regression(d),
        };
        Ok(Self {
            schema,
            schedule,
            task: cfg.task,
            noise_rate: cfg.noise_rate,
            noise_std: cfg.noise_std,
            rng: root.split("instances", 0),
            t: 0,
        })
    }

    pub fn schedule(&self) -> &DriftSchedule<HyperplaneConcept> {
        &self.schedule
    }
}

impl Stream for HyperplaneStream {
    fn schema(&self) -> &StreamSchema {
        &self.schema
    }

    fn next_instance(&mut self) -> Result<Option<Instance>> {
        let d = self.schema.n_features;
        let features: Vec<f64> = (0..d).map(|_| self.rng.uniform()).collect();
        let u_mix = self.rng.uniform();
        let concept = self.schedule.select(self.t, u_mix);
        let label = match self.task {
            Task::Classification => {
                let u_noise = self.rng.uniform();
                let mut c = hyperplane_label(&features, &concept.weights, concept.bias)?;
                if u_noise < self.noise_rate {
                    c = 1 - c;
                }
                Target::Class(c)
            }
            Task::Regression => {
                let noise = self.rng.normal() * self.noise_std;
                Target::Real(concept.score(&features)? + noise)
            }
        };
        let inst = Instance::new(self.t, features, Some(label));
        self.t += 1;
        Ok(Some(inst))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_and_sides() {
        assert_eq!(hyperplane_label(&[1.0, 0.0], &[1.0, 0.0], 0.0).unwrap(), 1);
        assert_eq!(hyperplane_label(&[-1.0, 0.0], &[1.0, 0.0], 0.0).unwrap(), 0);
        assert_eq!(hyperplane_label(&[0.0, 5.0], &[1.0, 0.0], 0.0).unwrap(), 1);
        assert_eq!(hyperplane_label(&[1.0, 1.0], &[1.0, -1.0], 0.0).unwrap(), 1);
    }

    #[test]
    fn dimension_mismatch_is_schema_error() {
        assert!(matches!(
            hyperplane_label(&[1.0], &[1.0, 0.0], 0.0),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn zero_weights_rejected() {
        assert!(HyperplaneConcept::new(vec![0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn abrupt_drift_switches_concepts() {
        let cfg = HyperplaneConfig {
            n_features: 4,
            drift: DriftParams {
                drift_position: Some(300),
                drift_width: 0,
            },
            ..Default::default()
        };
        let mut s = HyperplaneStream::from_config(&cfg, 5).unwrap();
        let schedule = s.schedule().clone();
        assert_ne!(schedule.before, schedule.after);
        for inst in s.take_instances(600).unwrap() {
            let c = if inst.index < 300 {
                &schedule.before
            } else {
                &schedule.after
            };
            let expected = hyperplane_label(&inst.features, &c.weights, c.bias).unwrap();
            assert_eq!(inst.label, Some(Target::Class(expected)));
        }
    }

    #[test]
    fn regression_targets_track_the_plane() {
        let cfg = HyperplaneConfig {
            n_features: 3,
            task: Task::Regression,
            noise_std: 0.0,
            ..Default::default()
        };
        let mut s = HyperplaneStream::from_config(&cfg, 9).unwrap();
        let plane = s.schedule().before.clone();
        for inst in s.take_instances(50).unwrap() {
            let y = inst.require_real().unwrap();
            assert!((y - plane.score(&inst.features).unwrap()).abs() < 1e-12);
        }
    }
}
