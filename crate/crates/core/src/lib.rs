//! Online learning on data streams.
//!
//! The crate is organized around a small set of contracts:
//!
//! - [`Stream`](streams::Stream) yields [`Instance`]s one at a time, either
//!   from a CSV file or from a synthetic generator with scheduled concept drift.
//! - [`Learner`] is the incremental model contract: `fit` on a pretraining
//!   batch, `partial_fit` one instance at a time, `predict`/`predict_proba`
//!   without mutating state.
//! - [`DriftDetector`](drift::DriftDetector) turns a stream of error bits or
//!   values into a stable / warning / drift signal.
//! - [`QueryStrategy`](strategies::QueryStrategy) decides, under a labeling
//!   budget, whether the label of an instance is requested.
//!
//! The [`evaluate`] module wires these together into prequential
//! (test-then-train) experiments and [`report`] renders the results.

pub mod drift;
pub mod ensembles;
pub mod error;
pub mod evaluate;
pub mod instance;
pub mod learner;
pub mod learners;
pub mod report;
pub mod rng;
pub mod strategies;
pub mod streams;

pub use error::{Error, Result};
pub use instance::{Instance, LabelKind, Prediction, StreamSchema, Target};
pub use learner::{argmax, normalize_proba, Learner, LearnerCaps};
pub use rng::StreamRng;
