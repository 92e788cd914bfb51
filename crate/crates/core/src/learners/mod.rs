//! Base incremental learners.

mod hoeffding;
mod knn;
mod majority;
mod ogd;

pub use hoeffding::{
    hoeffding_bound, ht_try_split, FeatureObserver, GaussianEstimator, HoeffdingTree, HtConfig,
    HtNode, LeafPrediction, SplitDecision,
};
pub use knn::{KnnBuffer, KnnConfig, KnnLearner};
pub use majority::MajorityClass;
pub use ogd::{OgdConfig, OgdLearner, OgdModel};

use crate::error::{Error, Result};
use crate::instance::StreamSchema;

pub(crate) fn require_classification(schema: &StreamSchema, who: &str) -> Result<usize> {
    schema
        .n_classes()
        .ok_or_else(|| Error::Unsupported(format!("{who} does not support regression")))
}
