use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluate::PrequentialRecord;
use crate::instance::Target;

pub const RECORDS_HEADER: &str = "step,true,pred,queried,model,stream,round";

/// Classes print as integers; real targets use the shortest representation
/// that parses back to the same value.
fn format_target(t: Target) -> String {
    match t {
        Target::Class(c) => c.to_string(),
        Target::Real(v) => format!("{v:?}"),
    }
}

fn parse_target(s: &str) -> Option<Target> {
    if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
        s.parse().ok().map(Target::Class)
    } else {
        s.parse().ok().map(Target::Real)
    }
}

/// Writes records ordered by (model, stream, round, step).
pub fn write_records_csv(records: &[PrequentialRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut sorted: Vec<&PrequentialRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.model, &a.stream, a.round, a.step).cmp(&(&b.model, &b.stream, b.round, b.step))
    });
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(io)?;
    w.write_record(RECORDS_HEADER.split(',')).map_err(io)?;
    for r in sorted {
        w.write_record([
            r.step.to_string(),
            format_target(r.true_label),
            format_target(r.pred_label),
            u8::from(r.queried).to_string(),
            r.model.clone(),
            r.stream.clone(),
            r.round.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records_csv(path: &Path) -> Result<Vec<PrequentialRecord>> {
    let mut reader =
        csv::ReaderBuilder::new()
            .from_path(path)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(e) => Error::io(path, e),
                other => Error::Parse {
                    row: 0,
                    message: format!("{other:?}"),
                },
            })?;
    let header = reader
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            message: e.to_string(),
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != RECORDS_HEADER {
        return Err(Error::Parse {
            row: 0,
            message: format!("expected header `{RECORDS_HEADER}`, found `{header}`"),
        });
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let bad = |message: String| Error::Parse {
            row: row_no,
            message,
        };
        let row = row.map_err(|e| bad(e.to_string()))?;
        if row.len() != 7 {
            return Err(bad(format!("expected 7 fields, found {}", row.len())));
        }
        let int = |k: usize| {
            row[k]
                .parse::<u64>()
                .map_err(|e| bad(format!("field {k}: {e}")))
        };
        let target = |k: usize| {
            parse_target(&row[k]).ok_or_else(|| bad(format!("field {k}: bad label `{}`", &row[k])))
        };
        out.push(PrequentialRecord {
            step: int(0)?,
            true_label: target(1)?,
            pred_label: target(2)?,
            queried: match &row[3] {
                "0" => false,
                "1" => true,
                other => return Err(bad(format!("queried must be 0 or 1, found `{other}`"))),
            },
            model: row[4].to_string(),
            stream: row[5].to_string(),
            round: int(6)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_round_trip() {
        for t in [
            Target::Class(0),
            Target::Class(17),
            Target::Real(3.0),
            Target::Real(-1e-7),
            Target::Real(0.1 + 0.2),
        ] {
            assert_eq!(parse_target(&format_target(t)), Some(t));
        }
    }
}
