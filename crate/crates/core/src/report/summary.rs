use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluate::SummaryRow;

pub const SUMMARY_HEADER: &str = "model,stream,rounds,mean_acc,std_acc,mean_macro_f1,spend";

fn fixed(v: Option<f64>, failed: bool) -> String {
    match v {
        Some(v) => format!("{v:.6}"),
        None if failed => "failed".into(),
        None => String::new(),
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Writes the summary CSV. `rounds` counts completed rounds; a pair whose
/// rounds all failed shows `failed` in the metric columns, and regression
/// pairs leave the classification columns empty.
pub fn write_summary(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# std_acc is the population standard deviation over rounds"
    );
    let _ = writeln!(s, "{SUMMARY_HEADER}");
    for r in rows {
        let all_failed = r.rounds == 0;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            quote(&r.model),
            quote(&r.stream),
            r.rounds,
            fixed(r.mean_acc, all_failed),
            fixed(r.std_acc, all_failed),
            fixed(r.mean_macro_f1, all_failed),
            fixed(r.spend, all_failed),
        );
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Human-readable table for the terminal.
pub fn format_summary_table(rows: &[SummaryRow]) -> String {
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
    let mut table = vec![[
        "model".to_string(),
        "stream".into(),
        "rounds".into(),
        "acc".into(),
        "std".into(),
        "macro_f1".into(),
        "mae".into(),
        "spend".into(),
    ]];
    for r in rows {
        let rounds = if r.failed > 0 {
            format!("{} ({} failed)", r.rounds, r.failed)
        } else {
            r.rounds.to_string()
        };
        table.push([
            r.model.clone(),
            r.stream.clone(),
            rounds,
            cell(r.mean_acc),
            cell(r.std_acc),
            cell(r.mean_macro_f1),
            cell(r.mean_mae),
            cell(r.spend),
        ]);
    }
    let widths: Vec<usize> = (0..8)
        .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &table {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(v, w)| format!("{v:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}
