use std::collections::VecDeque;

use super::runner::{JobOutcome, PrequentialRecord};
use crate::error::{Error, Result};
use crate::instance::{LabelKind, Target};

/// A metric value per evaluated step.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub steps: Vec<u64>,
    pub values: Vec<f64>,
}

impl MetricSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

fn trailing_mean(
    records: &[PrequentialRecord],
    window: usize,
    f: impl Fn(&PrequentialRecord) -> f64,
) -> Result<MetricSeries> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    if records.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut buf = VecDeque::with_capacity(window.min(records.len()));
    let mut sum = 0.0;
    let mut steps = Vec::with_capacity(records.len());
    let mut values = Vec::with_capacity(records.len());
    for r in records {
        let v = f(r);
        buf.push_back(v);
        sum += v;
        if buf.len() > window {
            sum -= buf.pop_front().unwrap_or(0.0);
        }
        steps.push(r.step);
        values.push(sum / buf.len() as f64);
    }
    Ok(MetricSeries { steps, values })
}

/// Mean correctness over the trailing `min(window, n)` records at each step.
pub fn windowed_accuracy(records: &[PrequentialRecord], window: usize) -> Result<MetricSeries> {
    trailing_mean(records, window, |r| if r.is_correct() { 1.0 } else { 0.0 })
}

/// Trailing mean absolute error for regression records.
pub fn windowed_mae(records: &[PrequentialRecord], window: usize) -> Result<MetricSeries> {
    trailing_mean(records, window, |r| {
        (r.true_label.value() - r.pred_label.value()).abs()
    })
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        Self {
            counts: vec![vec![0; n_classes]; n_classes],
        }
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let c = counts.len();
        if c == 0 || counts.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument(
                "confusion matrix must be square and non-empty".into(),
            ));
        }
        Ok(Self { counts })
    }

    pub fn from_records(records: &[PrequentialRecord], n_classes: usize) -> Result<Self> {
        let mut cm = Self::new(n_classes);
        for r in records {
            match (r.true_label, r.pred_label) {
                (Target::Class(t), Target::Class(p)) => cm.add(t, p)?,
                _ => {
                    return Err(Error::Unsupported(
                        "confusion matrix over regression records".into(),
                    ))
                }
            }
        }
        Ok(cm)
    }

    pub fn add(&mut self, truth: usize, pred: usize) -> Result<()> {
        let c = self.counts.len();
        if truth >= c || pred >= c {
            return Err(Error::InvalidArgument(format!(
                "class ({truth}, {pred}) outside 0..{c}"
            )));
        }
        self.counts[truth][pred] += 1;
        Ok(())
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Unweighted mean of per-class F1 over all classes of the matrix; a class
/// with no true and no predicted instances scores 0.
pub fn macro_f1(cm: &ConfusionMatrix) -> f64 {
    let c = cm.n_classes();
    let counts = cm.counts();
    let total: f64 = (0..c)
        .map(|k| {
            let tp = counts[k][k];
            let row: u64 = counts[k].iter().sum();
            let col: u64 = counts.iter().map(|r| r[k]).sum();
            // 2PR/(P+R) == 2tp/(row+col), and is 0 when tp is.
            if tp == 0 {
                0.0
            } else {
                2.0 * tp as f64 / (row + col) as f64
            }
        })
        .sum();
    total / c as f64
}

/// Per-(model, stream) aggregate over rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model: String,
    pub stream: String,
    /// Rounds that completed; failed rounds are excluded from the statistics.
    pub rounds: usize,
    pub failed: usize,
    /// Classification only.
    pub mean_acc: Option<f64>,
    pub std_acc: Option<f64>,
    pub mean_macro_f1: Option<f64>,
    /// Regression only.
    pub mean_mae: Option<f64>,
    pub spend: Option<f64>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Groups outcomes by (model, stream) in order of first appearance. The
/// standard deviation is the population one.
pub fn summarize(outcomes: &[JobOutcome]) -> Result<Vec<SummaryRow>> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for o in outcomes {
        let key = (o.spec.model.clone(), o.spec.stream.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(model, stream)| {
            let group: Vec<&JobOutcome> = outcomes
                .iter()
                .filter(|o| o.spec.model == model && o.spec.stream == stream)
                .collect();
            let done: Vec<&JobOutcome> = group
                .iter()
                .copied()
                .filter(|o| o.succeeded() && !o.records.is_empty())
                .collect();
            let mut row = SummaryRow {
                model,
                stream,
                rounds: done.len(),
                failed: group.len() - done.len(),
                mean_acc: None,
                std_acc: None,
                mean_macro_f1: None,
                mean_mae: None,
                spend: None,
            };
            if done.is_empty() {
                return Ok(row);
            }
            let spends: Vec<f64> = done.iter().map(|o| o.spend()).collect();
            row.spend = Some(mean_std(&spends).0);
            match done[0].label_kind {
                LabelKind::Classification { n_classes } => {
                    let mut accs = Vec::new();
                    let mut f1s = Vec::new();
                    for o in &done {
                        let correct = o.records.iter().filter(|r| r.is_correct()).count();
                        accs.push(correct as f64 / o.records.len() as f64);
                        f1s.push(macro_f1(&ConfusionMatrix::from_records(
                            &o.records, n_classes,
                        )?));
                    }
                    let (m, s) = mean_std(&accs);
                    row.mean_acc = Some(m);
                    row.std_acc = Some(s);
                    row.mean_macro_f1 = Some(mean_std(&f1s).0);
                }
                LabelKind::Regression => {
                    let maes: Vec<f64> = done
                        .iter()
                        .map(|o| {
                            o.records
                                .iter()
                                .map(|r| (r.true_label.value() - r.pred_label.value()).abs())
                                .sum::<f64>()
                                / o.records.len() as f64
                        })
                        .collect();
                    row.mean_mae = Some(mean_std(&maes).0);
                }
            }
            Ok(row)
        })
        .collect()
}
