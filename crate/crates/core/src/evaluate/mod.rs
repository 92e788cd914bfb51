//! Prequential experiments: configuration, component registry, the
//! test-then-train runner and its metrics.

mod config;
mod metrics;
mod registry;
mod runner;

pub use config::{ComponentSpec, ExperimentConfig};
pub use metrics::{
    macro_f1, summarize, windowed_accuracy, windowed_mae, ConfusionMatrix, MetricSeries, SummaryRow,
};
pub use registry::{
    build_model, build_strategy, build_stream, model_entries, resolve, strategy_entries,
    stream_entries, ComponentEntry, DETECTORS,
};
pub use runner::{run_jobs, run_prequential, Job, JobOutcome, JobSpec, PrequentialRecord};
