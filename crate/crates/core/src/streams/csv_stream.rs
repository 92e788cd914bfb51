use std::collections::BTreeSet;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{Stream, Task};
use crate::error::{Error, Result};
use crate::instance::{Instance, LabelKind, StreamSchema, Target};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CsvStreamConfig {
    pub path: PathBuf,
    /// Defaults to the last column.
    #[serde(default)]
    pub label_column: Option<LabelColumn>,
    #[serde(default = "default_true")]
    pub has_header: bool,
    #[serde(default)]
    pub shuffle_seed: Option<u64>,
    #[serde(default)]
    pub task: Task,
}

fn default_true() -> bool {
    true
}

impl CsvStreamConfig {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            label_column: None,
            has_header: true,
            shuffle_seed: None,
            task: Task::Classification,
        }
    }
}

#[derive(Debug, Clone)]
enum ClassMap {
    /// Labels are non-negative integers used as class ids directly.
    Integer,
    /// Sorted distinct label strings.
    Named(Vec<String>),
}

/// Stream over the rows of a CSV file.
///
/// Rows are read into memory when the stream is opened (class discovery and
/// shuffling need the whole label column); feature parsing is deferred to
/// [`Stream::next_instance`], which reports malformed rows by 1-based data
/// row number.
#[derive(Debug, Clone)]
pub struct CsvStream {
    schema: StreamSchema,
    rows: Vec<(usize, csv::StringRecord)>,
    label_idx: usize,
    classes: Option<ClassMap>,
    pos: usize,
}

impl CsvStream {
    pub fn open(cfg: &CsvStreamConfig) -> Result<Self> {
        let file = File::open(&cfg.path).map_err(|e| Error::io(&cfg.path, e))?;
        Self::from_reader(file, cfg)
    }

    pub fn from_reader<R: std::io::Read>(reader: R, cfg: &CsvStreamConfig) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(cfg.has_header)
            .flexible(true)
            .from_reader(reader);
        let header: Option<Vec<String>> = if cfg.has_header {
            let h = rdr.headers().map_err(|e| Error::Parse {
                row: 0,
                message: e.to_string(),
            })?;
            Some(h.iter().map(|s| s.trim().to_string()).collect())
        } else {
            None
        };
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                row: i + 1,
                message: e.to_string(),
            })?;
            rows.push((i + 1, rec));
        }
        let n_cols = match (&header, rows.first()) {
            (Some(h), _) => h.len(),
            (None, Some((_, r))) => r.len(),
            (None, None) => {
                return Err(Error::Parse {
                    row: 0,
                    message: "empty file without header".into(),
                })
            }
        };
        if n_cols < 2 {
            return Err(Error::Schema(
                "CSV needs at least one feature and a label column".into(),
            ));
        }
        let label_idx = match &cfg.label_column {
            None => n_cols - 1,
            Some(LabelColumn::Index(i)) if *i < n_cols => *i,
            Some(LabelColumn::Index(i)) => {
                return Err(Error::Schema(format!(
                    "label column {i} out of range ({n_cols} columns)"
                )))
            }
            Some(LabelColumn::Name(name)) => header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == name))
                .ok_or_else(|| Error::Schema(format!("label column '{name}' not found")))?,
        };
        let feature_names: Vec<String> = (0..n_cols)
            .filter(|&i| i != label_idx)
            .map(|i| match &header {
                Some(h) => h[i].clone(),
                None => format!("f{}", if i < label_idx { i } else { i - 1 }),
            })
            .collect();

        if let Some(seed) = cfg.shuffle_seed {
            let mut rng = StreamRng::new(seed);
            for i in (1..rows.len()).rev() {
                let j = rng.below(i + 1);
                rows.swap(i, j);
            }
        }

        let (label_kind, class_names, classes) = match cfg.task {
            Task::Regression => (LabelKind::Regression, Vec::new(), None),
            Task::Classification => {
                let labels: Vec<&str> = rows
                    .iter()
                    .filter_map(|(_, r)| r.get(label_idx).map(str::trim))
                    .collect();
                let ints: Option<Vec<usize>> = labels.iter().map(|l| parse_class_id(l)).collect();
                match ints {
                    Some(ids) => {
                        let n_classes = ids.iter().max().map_or(2, |m| (m + 1).max(2));
                        (
                            LabelKind::Classification { n_classes },
                            (0..n_classes).map(|c| c.to_string()).collect(),
                            Some(ClassMap::Integer),
                        )
                    }
                    None => {
                        let names: Vec<String> = labels
                            .iter()
                            .map(|s| s.to_string())
                            .collect::<BTreeSet<_>>()
                            .into_iter()
                            .collect();
                        let n_classes = names.len().max(2);
                        let mut class_names = names.clone();
                        while class_names.len() < n_classes {
                            class_names.push(format!("<unused{}>", class_names.len()));
                        }
                        (
                            LabelKind::Classification { n_classes },
                            class_names,
                            Some(ClassMap::Named(names)),
                        )
                    }
                }
            }
        };
        let schema = StreamSchema {
            n_features: n_cols - 1,
            feature_names,
            label_kind,
            class_names,
        };
        schema.validate()?;
        Ok(Self {
            schema,
            rows,
            label_idx,
            classes,
            pos: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn parse_class_id(s: &str) -> Option<usize> {
    if let Ok(v) = s.parse::<usize>() {
        return Some(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1e9 => Some(v as usize),
        _ => None,
    }
}

impl Stream for CsvStream {
    fn schema(&self) -> &StreamSchema {
        &self.schema
    }

    fn next_instance(&mut self) -> Result<Option<Instance>> {
        let Some((row, rec)) = self.rows.get(self.pos) else {
            return Ok(None);
        };
        let row = *row;
        let n_cols = self.schema.n_features + 1;
        if rec.len() != n_cols {
            return Err(Error::Parse {
                row,
                message: format!("expected {} fields, found {}", n_cols, rec.len()),
            });
        }
        let mut features = Vec::with_capacity(self.schema.n_features);
        for (i, field) in rec.iter().enumerate() {
            if i == self.label_idx {
                continue;
            }
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                row,
                message: format!("field {} ('{}') is not a number", i, field),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    message: format!("field {i} is not finite"),
                });
            }
            features.push(v);
        }
        let raw = rec[self.label_idx].trim();
        let label = match &self.classes {
            None => {
                let v: f64 = raw.parse().map_err(|_| Error::Parse {
                    row,
                    message: format!("target '{raw}' is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row,
                        message: "target is not finite".into(),
                    });
                }
                Target::Real(v)
            }
            Some(ClassMap::Integer) => {
                Target::Class(parse_class_id(raw).ok_or_else(|| Error::Parse {
                    row,
                    message: format!("label '{raw}' is not a class id"),
                })?)
            }
            Some(ClassMap::Named(names)) => Target::Class(
                names
                    .binary_search_by(|n| n.as_str().cmp(raw))
                    .map_err(|_| Error::Parse {
                        row,
                        message: format!("unknown label '{raw}'"),
                    })?,
            ),
        };
        let inst = Instance::new(self.pos as u64, features, Some(label));
        self.pos += 1;
        Ok(Some(inst))
    }
}

/// Writes the next `n` instances of `stream` as CSV with header
/// `f0,...,f{n-1},label`. Values use the shortest representation that parses
/// back to the same `f64`.
pub fn write_stream_csv(stream: &mut dyn Stream, n: usize, path: &Path) -> Result<usize> {
    let mut out = String::new();
    let d = stream.schema().n_features;
    let header: Vec<String> = (0..d)
        .map(|i| format!("f{i}"))
        .chain(["label".into()])
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    let mut written = 0;
    while written < n {
        let Some(inst) = stream.next_instance()? else {
            break;
        };
        for v in &inst.features {
            out.push_str(&format!("{v:?},"));
        }
        match inst.label {
            Some(Target::Class(c)) => out.push_str(&c.to_string()),
            Some(Target::Real(v)) => out.push_str(&format!("{v:?}")),
            None => {}
        }
        out.push('\n');
        written += 1;
    }
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(text: &str, cfg: &CsvStreamConfig) -> Result<CsvStream> {
        CsvStream::from_reader(text.as_bytes(), cfg)
    }

    fn cfg() -> CsvStreamConfig {
        CsvStreamConfig::new("mem.csv")
    }

    #[test]
    fn counts_rows_then_ends() {
        let mut text = String::from("a,b,label\n");
        for i in 0..100 {
            text.push_str(&format!("{},{},{}\n", i as f64 * 0.5, -(i as f64), i % 3));
        }
        let mut s = stream(&text, &cfg()).unwrap();
        assert_eq!(s.schema().n_classes(), Some(3));
        assert_eq!(s.schema().feature_names, vec!["a", "b"]);
        let all = s.take_instances(1_000).unwrap();
        assert_eq!(all.len(), 100);
        assert!(all
            .iter()
            .enumerate()
            .all(|(i, inst)| inst.index == i as u64));
        assert!(s.next_instance().unwrap().is_none());
    }

    #[test]
    fn malformed_row_reports_row_number() {
        let mut c = cfg();
        c.has_header = false;
        let mut s = stream("1.0,abc,0\n2.0,3.0,1\n", &c).unwrap();
        match s.next_instance() {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn named_label_column_and_string_classes() {
        let mut c = cfg();
        c.label_column = Some(LabelColumn::Name("kind".into()));
        let mut s = stream("kind,x\ncat,1\ndog,2\ncat,3\n", &c).unwrap();
        assert_eq!(s.schema().class_names, vec!["cat", "dog"]);
        let v = s.take_instances(3).unwrap();
        assert_eq!(v[1].label, Some(Target::Class(1)));
        assert_eq!(v[2].features, vec![3.0]);
    }

    #[test]
    fn missing_label_column_is_schema_error() {
        let mut c = cfg();
        c.label_column = Some(LabelColumn::Name("nope".into()));
        assert!(matches!(stream("a,b\n1,0\n", &c), Err(Error::Schema(_))));
    }

    #[test]
    fn regression_targets_and_shuffle_are_deterministic() {
        let mut c = cfg();
        c.task = Task::Regression;
        c.shuffle_seed = Some(3);
        let text = "x,y\n1,0.5\n2,1.5\n3,2.5\n4,3.5\n";
        let a = stream(text, &c).unwrap().take_instances(10).unwrap();
        let b = stream(text, &c).unwrap().take_instances(10).unwrap();
        assert_eq!(a, b);
        for inst in &a {
            assert_eq!(inst.require_real().unwrap(), inst.features[0] - 0.5);
        }
    }
}
