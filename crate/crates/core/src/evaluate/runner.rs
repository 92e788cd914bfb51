use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{LabelKind, Target};
use crate::learner::Learner;
use crate::strategies::QueryStrategy;
use crate::streams::Stream;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobSpec {
    pub index: usize,
    pub model: String,
    pub stream: String,
    pub round: u64,
}

/// A resolved (model, stream, round) cell of the experiment matrix. Each job
/// owns its components.
pub struct Job {
    pub spec: JobSpec,
    pub stream: Box<dyn Stream>,
    pub learner: Box<dyn Learner>,
    pub strategy: Box<dyn QueryStrategy>,
    pub n_samples: u64,
    pub n_pretrain: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrequentialRecord {
    pub step: u64,
    pub true_label: Target,
    pub pred_label: Target,
    pub queried: bool,
    pub model: String,
    pub stream: String,
    pub round: u64,
}

impl PrequentialRecord {
    pub fn is_correct(&self) -> bool {
        self.true_label == self.pred_label
    }
}

#[derive(Debug, Clone)]
pub struct JobOutcome {
    pub spec: JobSpec,
    pub label_kind: LabelKind,
    pub records: Vec<PrequentialRecord>,
    /// Set when the job failed; `records` then holds the log up to the
    /// failing step.
    pub failure: Option<String>,
}

impl JobOutcome {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    pub fn n_queried(&self) -> usize {
        self.records.iter().filter(|r| r.queried).count()
    }

    /// Fraction of evaluated instances whose label was requested.
    pub fn spend(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            self.n_queried() as f64 / self.records.len() as f64
        }
    }
}

/// Pretrains on the first `n_pretrain` instances, then for every further
/// instance up to `n_samples`: predict on the unlabeled copy, record, let the
/// strategy decide, and train on the instance if its label was queried.
/// Labels that are not queried are discarded.
pub fn run_prequential(job: Job) -> JobOutcome {
    let Job {
        spec,
        mut stream,
        mut learner,
        mut strategy,
        n_samples,
        n_pretrain,
    } = job;
    let label_kind = stream.schema().label_kind;
    let mut records = Vec::with_capacity(n_samples.saturating_sub(n_pretrain) as usize);
    let result = prequential_loop(
        &spec,
        stream.as_mut(),
        learner.as_mut(),
        strategy.as_mut(),
        n_samples,
        n_pretrain,
        &mut records,
    );
    JobOutcome {
        spec,
        label_kind,
        records,
        failure: result.err().map(|e| e.to_string()),
    }
}

fn prequential_loop(
    spec: &JobSpec,
    stream: &mut dyn Stream,
    learner: &mut dyn Learner,
    strategy: &mut dyn QueryStrategy,
    n_samples: u64,
    n_pretrain: u64,
    records: &mut Vec<PrequentialRecord>,
) -> Result<()> {
    let pretrain = stream.take_instances(n_pretrain as usize)?;
    if (pretrain.len() as u64) < n_pretrain {
        return Err(Error::InvalidPretrain(format!(
            "stream ended after {} of {n_pretrain} pretraining instances",
            pretrain.len()
        )));
    }
    learner.fit(&pretrain)?;
    drop(pretrain);

    for step in n_pretrain..n_samples {
        let Some(instance) = stream.next_instance()? else {
            break;
        };
        let truth = instance.require_label()?;
        let prediction = learner.predict(&instance.unlabeled())?;
        let queried = strategy.should_query(&prediction.proba);
        records.push(PrequentialRecord {
            step,
            true_label: truth,
            pred_label: prediction.label,
            queried,
            model: spec.model.clone(),
            stream: spec.stream.clone(),
            round: spec.round,
        });
        if queried {
            learner.partial_fit(&instance)?;
        }
    }
    Ok(())
}

/// Runs jobs on up to `parallelism` threads. Outcomes come back in job order
/// whatever the completion order.
pub fn run_jobs(jobs: Vec<Job>, parallelism: usize) -> Result<Vec<JobOutcome>> {
    if parallelism <= 1 {
        return Ok(jobs.into_iter().map(run_prequential).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| {
            Error::InvalidArgument(format!("cannot start {parallelism} worker threads: {e}"))
        })?;
    Ok(pool.install(|| jobs.into_par_iter().map(run_prequential).collect()))
}
