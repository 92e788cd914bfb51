use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use super::config::{ComponentSpec, ExperimentConfig};
use super::runner::{Job, JobSpec};
use crate::ensembles::{
    AdaptiveRandomForest, ArfConfig, BaggingConfig, ChunkConfig, ChunkEnsemble, LearnerFactory,
    OzaBagging,
};
use crate::error::{Error, Result};
use crate::instance::StreamSchema;
use crate::learner::{Learner, LearnerCaps};
use crate::learners::{
    HoeffdingTree, HtConfig, KnnConfig, KnnLearner, MajorityClass, OgdConfig, OgdLearner,
};
use crate::rng::StreamRng;
use crate::strategies::{
    FixedUncertainty, FixedUncertaintyConfig, QueryStrategy, RandomConfig, RandomStrategy,
    Supervised, VariableUncertainty, VariableUncertaintyConfig,
};
use crate::streams::{
    CsvStream, CsvStreamConfig, HyperplaneConfig, HyperplaneStream, SeaConfig, SeaStream, Stream,
};

/// One registered component as shown by `list`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentEntry {
    pub name: &'static str,
    pub caps: LearnerCaps,
    pub summary: &'static str,
}

const fn caps(multiclass: bool, regression: bool, drift: bool) -> LearnerCaps {
    LearnerCaps {
        supports_multiclass: multiclass,
        supports_regression: regression,
        drift_adaptive: drift,
    }
}

const MODELS: &[ComponentEntry] = &[
    ComponentEntry {
        name: "MajorityClass",
        caps: caps(true, false, false),
        summary: "predicts the most frequent class seen so far",
    },
    ComponentEntry {
        name: "OGD",
        caps: caps(true, false, false),
        summary: "softmax regression trained by online gradient descent",
    },
    ComponentEntry {
        name: "MLP",
        caps: caps(true, false, false),
        summary: "OGD with one tanh hidden layer (8 units by default)",
    },
    ComponentEntry {
        name: "KNN",
        caps: caps(true, true, false),
        summary: "k nearest neighbours over a sliding window",
    },
    ComponentEntry {
        name: "HoeffdingTree",
        caps: caps(true, false, false),
        summary: "very fast decision tree with Hoeffding-bound splits",
    },
    ComponentEntry {
        name: "OzaBagging",
        caps: caps(true, false, false),
        summary: "online bagging with Poisson(1) weights; caps follow the base learner (HoeffdingTree by default)",
    },
    ComponentEntry {
        name: "ARF",
        caps: caps(true, false, true),
        summary: "adaptive random forest with per-member DDM and background trees",
    },
    ComponentEntry {
        name: "SRP",
        caps: caps(true, false, true),
        summary: "streaming random patches: ARF machinery with resampled subspaces",
    },
    ComponentEntry {
        name: "ChunkEnsemble",
        caps: caps(true, false, true),
        summary: "chunk-trained members weighted against a random-predictor MSE",
    },
];

const STREAMS: &[ComponentEntry] = &[
    ComponentEntry {
        name: "sea",
        caps: caps(false, false, true),
        summary: "SEA concepts, 3 features, binary, optional threshold drift",
    },
    ComponentEntry {
        name: "hyperplane",
        caps: caps(false, true, true),
        summary: "random hyperplane, classification or regression, optional drift",
    },
    ComponentEntry {
        name: "csv",
        caps: caps(true, true, false),
        summary: "rows of a CSV file",
    },
];

const STRATEGIES: &[ComponentEntry] = &[
    ComponentEntry {
        name: "supervised",
        caps: caps(true, true, false),
        summary: "queries every label",
    },
    ComponentEntry {
        name: "Random",
        caps: caps(true, true, false),
        summary: "queries with probability equal to the budget",
    },
    ComponentEntry {
        name: "FixedUncertainty",
        caps: caps(true, false, false),
        summary: "queries when the top probability is below a fixed threshold",
    },
    ComponentEntry {
        name: "VariableUncertainty",
        caps: caps(true, false, false),
        summary: "queries below an adaptive threshold",
    },
];

/// Drift detectors available to the ensembles (not selectable as jobs).
pub const DETECTORS: &[(&str, &str)] = &[
    (
        "DDM",
        "drift detection method, 2 sigma warning / 3 sigma drift",
    ),
    ("PageHinkley", "Page-Hinkley cumulative deviation test"),
];

pub fn model_entries() -> &'static [ComponentEntry] {
    MODELS
}

pub fn stream_entries() -> &'static [ComponentEntry] {
    STREAMS
}

pub fn strategy_entries() -> &'static [ComponentEntry] {
    STRATEGIES
}

fn lookup(kind: &'static str, table: &[ComponentEntry], name: &str) -> Result<&'static str> {
    table
        .iter()
        .find(|e| e.name.eq_ignore_ascii_case(name))
        .map(|e| e.name)
        .ok_or_else(|| Error::Registry {
            kind,
            name: name.to_string(),
            available: table.iter().map(|e| e.name.to_string()).collect(),
        })
}

fn parse<T: DeserializeOwned>(name: &str, params: Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(params))
        .map_err(|e| Error::Config(format!("params of `{name}`: {e}")))
}

fn take_base(name: &str, params: &mut Map<String, Value>) -> Result<ComponentSpec> {
    match params.remove("base") {
        None => Ok(ComponentSpec::named("HoeffdingTree")),
        Some(v) => serde_json::from_value(v)
            .map_err(|e| Error::Config(format!("params of `{name}`: base: {e}"))),
    }
}

fn factory(base: ComponentSpec, schema: StreamSchema) -> LearnerFactory {
    Arc::new(move |seed| build_model(&base, &schema, seed))
}

/// Instantiates a model for `schema`.
pub fn build_model(
    spec: &ComponentSpec,
    schema: &StreamSchema,
    seed: u64,
) -> Result<Box<dyn Learner>> {
    let name = lookup("model", MODELS, &spec.name)?;
    let mut params = spec.params.clone();
    let schema = schema.clone();
    let model: Box<dyn Learner> = match name {
        "MajorityClass" => {
            parse::<Empty>(name, params)?;
            Box::new(MajorityClass::new(schema)?)
        }
        "OGD" => Box::new(OgdLearner::new(
            schema,
            parse::<OgdConfig>(name, params)?,
            seed,
        )?),
        "MLP" => {
            params.entry("hidden").or_insert(Value::from(8));
            Box::new(OgdLearner::new(
                schema,
                parse::<OgdConfig>(name, params)?,
                seed,
            )?)
        }
        "KNN" => Box::new(KnnLearner::new(schema, parse::<KnnConfig>(name, params)?)?),
        "HoeffdingTree" => Box::new(HoeffdingTree::new(
            schema,
            parse::<HtConfig>(name, params)?,
        )?),
        "OzaBagging" => {
            let base = take_base(name, &mut params)?;
            let cfg = parse::<BaggingConfig>(name, params)?;
            Box::new(OzaBagging::new(
                schema.clone(),
                cfg,
                factory(base, schema),
                seed,
            )?)
        }
        "ARF" | "SRP" => {
            let mode = if name == "ARF" { "arf" } else { "srp" };
            params.entry("mode").or_insert(Value::from(mode));
            Box::new(AdaptiveRandomForest::new(
                schema,
                parse::<ArfConfig>(name, params)?,
                seed,
            )?)
        }
        "ChunkEnsemble" => {
            let base = take_base(name, &mut params)?;
            let cfg = parse::<ChunkConfig>(name, params)?;
            Box::new(ChunkEnsemble::new(
                schema.clone(),
                cfg,
                factory(base, schema),
                seed,
            )?)
        }
        _ => unreachable!("registered model without constructor: {name}"),
    };
    Ok(model)
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct Empty {}

pub fn build_stream(spec: &ComponentSpec, seed: u64) -> Result<Box<dyn Stream>> {
    let name = lookup("stream", STREAMS, &spec.name)?;
    let params = spec.params.clone();
    let stream: Box<dyn Stream> = match name {
        "sea" => Box::new(SeaStream::from_config(
            &parse::<SeaConfig>(name, params)?,
            seed,
        )?),
        "hyperplane" => Box::new(HyperplaneStream::from_config(
            &parse::<HyperplaneConfig>(name, params)?,
            seed,
        )?),
        "csv" => Box::new(CsvStream::open(&parse::<CsvStreamConfig>(name, params)?)?),
        _ => unreachable!("registered stream without constructor: {name}"),
    };
    Ok(stream)
}

pub fn build_strategy(
    spec: &ComponentSpec,
    schema: &StreamSchema,
    seed: u64,
) -> Result<Box<dyn QueryStrategy>> {
    let name = lookup("strategy", STRATEGIES, &spec.name)?;
    let params = spec.params.clone();
    let strategy: Box<dyn QueryStrategy> = match name {
        "supervised" => {
            parse::<Empty>(name, params)?;
            Box::new(Supervised::default())
        }
        "Random" => Box::new(RandomStrategy::new(
            &parse::<RandomConfig>(name, params)?,
            seed,
        )?),
        "FixedUncertainty" => Box::new(FixedUncertainty::new(&parse::<FixedUncertaintyConfig>(
            name, params,
        )?)?),
        "VariableUncertainty" => Box::new(VariableUncertainty::new(&parse::<
            VariableUncertaintyConfig,
        >(name, params)?)?),
        _ => unreachable!("registered strategy without constructor: {name}"),
    };
    if strategy.needs_proba() && !schema.is_classification() {
        return Err(Error::Config(format!(
            "strategy `{name}` needs class probabilities; the stream is a regression task"
        )));
    }
    Ok(strategy)
}

/// Validates `config` and instantiates one job per (model, stream, round),
/// in that nesting order. Every component gets its own derived seed, so a
/// job's stream does not depend on which model consumes it.
pub fn resolve(config: &ExperimentConfig) -> Result<Vec<Job>> {
    config.validate()?;
    for spec in &config.models {
        lookup("model", MODELS, &spec.name)?;
    }
    for spec in &config.streams {
        lookup("stream", STREAMS, &spec.name)?;
    }
    lookup("strategy", STRATEGIES, &config.strategy.name)?;

    let mut jobs = Vec::with_capacity(config.n_jobs());
    for model in &config.models {
        for stream_spec in &config.streams {
            for round in 0..config.n_rounds {
                let context = |e: Error| match e {
                    e @ (Error::Registry { .. } | Error::Config(_) | Error::Io { .. }) => e,
                    e => {
                        Error::Config(format!("{} on {}: {e}", model.label(), stream_spec.label()))
                    }
                };
                let stream_seed = StreamRng::derive_seed(
                    config.seed,
                    &format!("stream:{}", stream_spec.label()),
                    round,
                );
                let stream = build_stream(stream_spec, stream_seed).map_err(context)?;
                let schema = stream.schema().clone();
                let pair = format!("model:{}|stream:{}", model.label(), stream_spec.label());
                let learner = build_model(
                    model,
                    &schema,
                    StreamRng::derive_seed(config.seed, &pair, round),
                )
                .map_err(context)?;
                let strategy = build_strategy(
                    &config.strategy,
                    &schema,
                    StreamRng::derive_seed(config.seed, &format!("strategy|{pair}"), round),
                )
                .map_err(context)?;
                jobs.push(Job {
                    spec: JobSpec {
                        index: jobs.len(),
                        model: model.label().to_string(),
                        stream: stream_spec.label().to_string(),
                        round,
                    },
                    stream,
                    learner,
                    strategy,
                    n_samples: config.n_samples,
                    n_pretrain: config.n_pretrain,
                });
            }
        }
    }
    Ok(jobs)
}
