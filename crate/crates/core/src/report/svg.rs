use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluate::{windowed_accuracy, windowed_mae, MetricSeries, PrequentialRecord};
use crate::instance::Target;

/// Matplotlib's tab10 colors.
pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const MIN_WIDTH: f64 = 800.0;
/// Rough advance of a 12px sans-serif glyph, used to size the legend.
const CHAR_WIDTH: f64 = 7.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 600.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 440.0;
const N_TICKS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub data: MetricSeries,
    /// Index into [`PALETTE`], taken modulo its length.
    pub color: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub y_range: (f64, f64),
    pub series: Vec<Series>,
}

impl ComparisonSpec {
    pub fn new(title: impl Into<String>, series: Vec<Series>) -> Self {
        Self {
            title: title.into(),
            x_label: "step".into(),
            y_label: "accuracy".into(),
            y_range: (0.0, 1.0),
            series,
        }
    }

    /// Sets the y range to `[0, max]` over all series, for unbounded metrics.
    pub fn fit_y_range(mut self) -> Self {
        let max = self
            .series
            .iter()
            .flat_map(|s| s.data.values.iter().copied())
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max);
        self.y_range = (0.0, if max > 0.0 { max * 1.05 } else { 1.0 });
        self
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Series past the first palette cycle are dashed so colors stay distinct.
fn dash(color: usize) -> &'static str {
    match (color / PALETTE.len()) % 3 {
        0 => "",
        1 => r#" stroke-dasharray="6 3""#,
        _ => r#" stroke-dasharray="2 2""#,
    }
}

fn tick_label(v: f64, span: f64) -> String {
    if span >= 10.0 {
        format!("{v:.0}")
    } else if span >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

/// Renders the plot as a standalone SVG document. Output depends only on
/// `spec`.
pub fn render_svg_string(spec: &ComparisonSpec) -> Result<String> {
    if spec.series.is_empty() || spec.series.iter().any(|s| s.data.is_empty()) {
        return Err(Error::EmptySeries);
    }
    let (lo, hi) = spec.y_range;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidArgument(format!("bad y range [{lo}, {hi}]")));
    }
    let x_min = spec
        .series
        .iter()
        .filter_map(|s| s.data.steps.first())
        .min()
        .copied()
        .unwrap_or(0) as f64;
    let x_max = spec
        .series
        .iter()
        .filter_map(|s| s.data.steps.last())
        .max()
        .copied()
        .unwrap_or(0) as f64;
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let px = |x: f64| {
        if x_max > x_min {
            LEFT + (x - x_min) / x_span * (RIGHT - LEFT)
        } else {
            (LEFT + RIGHT) / 2.0
        }
    };
    let py = |y: f64| BOTTOM - (y - lo) / (hi - lo) * (BOTTOM - TOP);
    let longest = spec
        .series
        .iter()
        .map(|s| s.label.chars().count())
        .max()
        .unwrap_or(0);
    let width = MIN_WIDTH.max((RIGHT + 62.0 + CHAR_WIDTH * longest as f64).ceil());

    let mut s = String::new();
    // Writing to a String cannot fail.
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?>"#
    );
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{HEIGHT}" viewBox="0 0 {width} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{width}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        (LEFT + RIGHT) / 2.0,
        escape(&spec.title)
    );

    let _ = writeln!(s, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.2}" y1="{BOTTOM:.2}" x2="{RIGHT:.2}" y2="{BOTTOM:.2}"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{BOTTOM:.2}"/>"#
    );
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="ticks" font-size="11">"#);
    for i in 0..=N_TICKS {
        let f = i as f64 / N_TICKS as f64;
        let yv = lo + f * (hi - lo);
        let y = py(yv);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            tick_label(yv, hi - lo)
        );
        let xv = x_min + f * (x_max - x_min);
        let x = px(xv);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{BOTTOM:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            BOTTOM + 5.0,
            BOTTOM + 18.0,
            xv.round()
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 40.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0,
        escape(&spec.y_label)
    );

    for series in &spec.series {
        let color = PALETTE[series.color % PALETTE.len()];
        let _ = write!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{} data-label="{}" points=""#,
            dash(series.color),
            escape(&series.label)
        );
        for (i, (&x, &y)) in series
            .data
            .steps
            .iter()
            .zip(&series.data.values)
            .enumerate()
        {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{:.2},{:.2}", px(x as f64), py(y));
        }
        let _ = writeln!(s, r#""/>"#);
    }

    let _ = writeln!(s, r#"<g class="legend">"#);
    for (i, series) in spec.series.iter().enumerate() {
        let color = PALETTE[series.color % PALETTE.len()];
        let y = TOP + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="3"{}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            RIGHT + 20.0,
            RIGHT + 45.0,
            dash(series.color),
            RIGHT + 52.0,
            y + 4.0,
            escape(&series.label)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

pub fn render_comparison_svg(spec: &ComparisonSpec, path: &Path) -> Result<()> {
    let svg = render_svg_string(spec)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

/// Point-wise mean of equally indexed series, truncated to the shortest.
pub(crate) fn mean_series(series: &[MetricSeries]) -> Option<MetricSeries> {
    let len = series.iter().map(MetricSeries::len).min()?;
    let first = series.first()?;
    let n = series.len() as f64;
    Some(MetricSeries {
        steps: first.steps[..len].to_vec(),
        values: (0..len)
            .map(|i| series.iter().map(|s| s.values[i]).sum::<f64>() / n)
            .collect(),
    })
}

/// One series per (model, stream) in order of first appearance, averaging
/// the windowed metric over rounds. Classification records give accuracy,
/// regression records give MAE.
pub fn comparison_from_records(
    records: &[PrequentialRecord],
    window: usize,
    title: &str,
) -> Result<ComparisonSpec> {
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    for r in records {
        if !pairs.contains(&(r.model.as_str(), r.stream.as_str())) {
            pairs.push((&r.model, &r.stream));
        }
    }
    if pairs.is_empty() {
        return Err(Error::EmptySeries);
    }
    let regression = matches!(records[0].true_label, Target::Real(_));
    let multi_stream = pairs.iter().any(|p| p.1 != pairs[0].1);
    let mut out = Vec::new();
    for (i, (model, stream)) in pairs.iter().enumerate() {
        let mut rounds: Vec<u64> = records
            .iter()
            .filter(|r| r.model == *model && r.stream == *stream)
            .map(|r| r.round)
            .collect();
        rounds.sort_unstable();
        rounds.dedup();
        let per_round = rounds
            .iter()
            .map(|round| {
                let mut rs: Vec<PrequentialRecord> = records
                    .iter()
                    .filter(|r| r.model == *model && r.stream == *stream && r.round == *round)
                    .cloned()
                    .collect();
                rs.sort_by_key(|r| r.step);
                if regression {
                    windowed_mae(&rs, window)
                } else {
                    windowed_accuracy(&rs, window)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let data = mean_series(&per_round).ok_or(Error::EmptySeries)?;
        out.push(Series {
            label: if multi_stream {
                format!("{model} / {stream}")
            } else {
                model.to_string()
            },
            data,
            color: i,
        });
    }
    let mut spec = ComparisonSpec::new(title, out);
    spec.y_label = if regression {
        format!("MAE (trailing {window})")
    } else {
        format!("accuracy (trailing {window})")
    };
    Ok(if regression { spec.fit_y_range() } else { spec })
}
