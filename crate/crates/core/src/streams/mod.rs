//! Data sources: CSV ingestion and synthetic generators with scheduled drift.

mod csv_stream;
mod hyperplane;
mod sea;

pub use csv_stream::{write_stream_csv, CsvStream, CsvStreamConfig, LabelColumn};
pub use hyperplane::{
    hyperplane_label, HyperplaneConcept, HyperplaneConfig, HyperplaneStream, Task,
};
pub use sea::{sea_label, SeaConcept, SeaConfig, SeaStream};

use serde::Deserialize;

use crate::error::Result;
use crate::instance::{Instance, StreamSchema};

/// A source of instances with consecutive indexes starting at 0.
pub trait Stream: Send {
    fn schema(&self) -> &StreamSchema;

    /// Next instance, or `None` at end of stream.
    fn next_instance(&mut self) -> Result<Option<Instance>>;

    /// Pulls up to `n` instances.
    fn take_instances(&mut self, n: usize) -> Result<Vec<Instance>> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            match self.next_instance()? {
                Some(inst) => out.push(inst),
                None => break,
            }
        }
        Ok(out)
    }
}

/// When and how fast one concept is replaced by another.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSchedule<C> {
    pub position: u64,
    /// 0 means abrupt.
    pub width: u64,
    pub before: C,
    pub after: C,
}

impl<C> DriftSchedule<C> {
    pub fn stationary(concept: C) -> Self
    where
        C: Clone,
    {
        Self {
            position: u64::MAX,
            width: 0,
            before: concept.clone(),
            after: concept,
        }
    }

    pub fn mix(&self, t: u64) -> f64 {
        concept_mix(t, self.position, self.width)
    }

    /// Picks the concept for step `t` given a uniform draw `u` in `[0, 1)`.
    pub fn select(&self, t: u64, u: f64) -> &C {
        if u < self.mix(t) {
            &self.after
        } else {
            &self.before
        }
    }
}

/// Probability of drawing from the post-drift concept at step `t`.
///
/// Abrupt (`width == 0`): a step at `position`. Gradual: the logistic curve
/// `1 / (1 + exp(-4 (t - position) / width))`.
pub fn concept_mix(t: u64, position: u64, width: u64) -> f64 {
    if width == 0 {
        return if t < position { 0.0 } else { 1.0 };
    }
    let z = -4.0 * (t as f64 - position as f64) / width as f64;
    1.0 / (1.0 + z.exp())
}

/// Drift placement parameters shared by the synthetic generators.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DriftParams {
    pub drift_position: Option<u64>,
    #[serde(default)]
    pub drift_width: u64,
}
