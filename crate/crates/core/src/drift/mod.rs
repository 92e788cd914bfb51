//! Drift detectors with a three-level output.

mod ddm;
mod page_hinkley;

pub use ddm::{Ddm, DdmConfig};
pub use page_hinkley::{PageHinkley, PageHinkleyConfig};

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DriftLevel {
    Stable,
    Warning,
    Drift,
}

/// Common detector contract. Detectors never reset themselves after a
/// drift; the caller decides (see [`DriftDetector::reset`]).
pub trait DriftDetector: Send {
    /// Feeds one observation (an error bit as 0/1, or a monitored value).
    fn update(&mut self, value: f64) -> DriftLevel;

    fn level(&self) -> DriftLevel;

    fn reset(&mut self);
}
