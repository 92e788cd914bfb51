use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::records::write_records_csv;
use super::summary::write_summary;
use super::svg::{
    comparison_from_records, mean_series, render_comparison_svg, ComparisonSpec, Series,
};
use crate::error::{Error, Result};
use crate::evaluate::{
    summarize, ExperimentConfig, JobOutcome, MetricSeries, PrequentialRecord, SummaryRow,
};
use crate::instance::LabelKind;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Flat key=value description of a run. Holds no paths or timestamps, so two
/// runs of the same configuration produce the same text.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunManifest {
    pub entries: Vec<(String, String)>,
    /// Paths relative to the output directory, with their SHA-256.
    pub files: Vec<(String, String)>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        for (path, hash) in &self.files {
            let _ = writeln!(s, "file.{path}={hash}");
        }
        s
    }

    pub fn file_hash(&self, path: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(p, _)| p == path)
            .map(|(_, h)| h.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutputs {
    pub manifest: RunManifest,
    pub summary: Vec<SummaryRow>,
    /// Every written file, manifest last.
    pub files: Vec<PathBuf>,
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn json(v: &impl serde::Serialize) -> String {
    serde_json::to_string(v).unwrap_or_default()
}

/// Cumulative fraction of queried labels at each step.
fn spend_series(records: &[PrequentialRecord]) -> MetricSeries {
    let mut queried = 0u64;
    let mut values = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        queried += u64::from(r.queried);
        values.push(queried as f64 / (i + 1) as f64);
    }
    MetricSeries {
        steps: records.iter().map(|r| r.step).collect(),
        values,
    }
}

/// Writes record files, `summary.csv`, the comparison plot(s), `spend.svg`
/// for non-supervised strategies, and finally `manifest.txt`.
pub fn write_run(
    out_dir: &Path,
    config: &ExperimentConfig,
    outcomes: &[JobOutcome],
    window: usize,
) -> Result<RunOutputs> {
    let records_dir = out_dir.join("records");
    std::fs::create_dir_all(&records_dir).map_err(|e| Error::io(&records_dir, e))?;
    let mut files: Vec<(String, PathBuf)> = Vec::new();

    let mut manifest = RunManifest::default();
    let mut entry = |k: &str, v: String| manifest.entries.push((k.to_string(), v));
    entry("config.n_samples", config.n_samples.to_string());
    entry("config.n_pretrain", config.n_pretrain.to_string());
    entry("config.n_rounds", config.n_rounds.to_string());
    entry("config.seed", config.seed.to_string());
    entry("config.models", json(&config.models));
    entry("config.streams", json(&config.streams));
    entry("config.strategy", json(&config.strategy));
    entry("metric.window", window.to_string());
    entry("unqueried_labels", "discarded".into());
    for o in outcomes {
        let status = match &o.failure {
            None => "ok".to_string(),
            Some(msg) => format!("failed: {}", msg.replace('\n', " ")),
        };
        entry(
            &format!("job.{:04}", o.spec.index),
            format!(
                "model={} stream={} round={} records={} status={status}",
                o.spec.model,
                o.spec.stream,
                o.spec.round,
                o.records.len()
            ),
        );
    }

    for o in outcomes.iter().filter(|o| !o.records.is_empty()) {
        let name = format!(
            "records/{:04}_{}_{}_r{}.csv",
            o.spec.index,
            sanitize(&o.spec.model),
            sanitize(&o.spec.stream),
            o.spec.round
        );
        let path = out_dir.join(&name);
        write_records_csv(&o.records, &path)?;
        files.push((name, path));
    }

    let summary = summarize(outcomes)?;
    let path = out_dir.join("summary.csv");
    write_summary(&summary, &path)?;
    files.push(("summary.csv".into(), path));

    let done: Vec<&JobOutcome> = outcomes
        .iter()
        .filter(|o| o.succeeded() && !o.records.is_empty())
        .collect();
    let (classif, regress): (Vec<&JobOutcome>, Vec<&JobOutcome>) = done
        .iter()
        .partition(|o| matches!(o.label_kind, LabelKind::Classification { .. }));
    let plots = [
        (classif, "comparison.svg", "Prequential accuracy"),
        (
            regress,
            "comparison_mae.svg",
            "Prequential mean absolute error",
        ),
    ];
    let only_regression = plots[0].0.is_empty();
    for (group, file, title) in plots {
        if group.is_empty() {
            continue;
        }
        let records: Vec<PrequentialRecord> = group
            .iter()
            .flat_map(|o| o.records.iter().cloned())
            .collect();
        let spec = comparison_from_records(&records, window, title)?;
        let file = if only_regression {
            "comparison.svg"
        } else {
            file
        };
        let path = out_dir.join(file);
        render_comparison_svg(&spec, &path)?;
        files.push((file.to_string(), path));
    }

    if !config.strategy.name.eq_ignore_ascii_case("supervised") && !done.is_empty() {
        let mut pairs: Vec<(&str, &str)> = Vec::new();
        for o in &done {
            if !pairs.contains(&(o.spec.model.as_str(), o.spec.stream.as_str())) {
                pairs.push((&o.spec.model, &o.spec.stream));
            }
        }
        let multi_stream = pairs.iter().any(|p| p.1 != pairs[0].1);
        let series = pairs
            .iter()
            .enumerate()
            .filter_map(|(i, (m, s))| {
                let per_round: Vec<MetricSeries> = done
                    .iter()
                    .filter(|o| o.spec.model == *m && o.spec.stream == *s)
                    .map(|o| spend_series(&o.records))
                    .collect();
                Some(Series {
                    label: if multi_stream {
                        format!("{m} / {s}")
                    } else {
                        m.to_string()
                    },
                    data: mean_series(&per_round)?,
                    color: i,
                })
            })
            .collect();
        let mut spec =
            ComparisonSpec::new(format!("Label spend ({})", config.strategy.name), series);
        spec.y_label = "queried / seen".into();
        let path = out_dir.join("spend.svg");
        render_comparison_svg(&spec, &path)?;
        files.push(("spend.svg".into(), path));
    }

    for (name, path) in &files {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        manifest.files.push((name.clone(), sha256_hex(&bytes)));
    }
    let path = out_dir.join("manifest.txt");
    std::fs::write(&path, manifest.to_text()).map_err(|e| Error::io(&path, e))?;
    let mut written: Vec<PathBuf> = files.into_iter().map(|(_, p)| p).collect();
    written.push(path);
    Ok(RunOutputs {
        manifest,
        summary,
        files: written,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
