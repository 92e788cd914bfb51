use std::path::Path;

use proptest::prelude::*;
use streamlearn::evaluate::{windowed_accuracy, MetricSeries, PrequentialRecord};
use streamlearn::report::*;
use streamlearn::{Error, Target};

fn toy_spec() -> ComparisonSpec {
    let a = MetricSeries {
        steps: vec![0, 10, 20, 30, 40],
        values: vec![0.5, 0.6, 0.75, 0.8, 0.9],
    };
    let b = MetricSeries {
        steps: vec![0, 10, 20, 30, 40],
        values: vec![0.5, 0.4, 0.45, 0.5, 0.55],
    };
    ComparisonSpec::new(
        "Toy <comparison>",
        vec![
            Series {
                label: "tree".into(),
                data: a,
                color: 0,
            },
            Series {
                label: "ogd & co".into(),
                data: b,
                color: 1,
            },
        ],
    )
}

/// Set `UPDATE_GOLDEN=1` to rewrite the reference file after an intended change.
#[test]
fn toy_plot_matches_golden_file() {
    let svg = render_svg_string(&toy_spec()).unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/toy_comparison.svg");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &svg).unwrap();
    }
    let expected = std::fs::read_to_string(&golden).unwrap();
    assert_eq!(svg, expected);
}

#[test]
fn plot_is_well_formed_with_one_polyline_point_per_step() {
    let spec = toy_spec();
    let svg = render_svg_string(&spec).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let lines: Vec<_> = doc
        .descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .collect();
    assert_eq!(lines.len(), 2);
    for (node, series) in lines.iter().zip(&spec.series) {
        assert_eq!(node.attribute("data-label"), Some(series.label.as_str()));
        let points = node.attribute("points").unwrap().split(' ').count();
        assert_eq!(points, series.data.len());
    }
    let texts: Vec<&str> = doc.descendants().filter_map(|n| n.text()).collect();
    assert!(texts.contains(&"Toy <comparison>"));
}

#[test]
fn empty_series_is_an_error() {
    let spec = ComparisonSpec::new("x", vec![]);
    assert!(matches!(render_svg_string(&spec), Err(Error::EmptySeries)));
}

fn records(n: u64, model: &str, round: u64) -> Vec<PrequentialRecord> {
    (0..n)
        .map(|step| PrequentialRecord {
            step,
            true_label: Target::Class((step % 3) as usize),
            pred_label: Target::Class(((step * 7 / 5) % 3) as usize),
            queried: step % 4 == 0,
            model: model.into(),
            stream: "sea, \"quoted\"".into(),
            round,
        })
        .collect()
}

#[test]
fn records_round_trip_and_line_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let recs = records(900, "HT", 0);
    write_records_csv(&recs, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 901);
    assert_eq!(text.lines().next(), Some(RECORDS_HEADER));
    let back = read_records_csv(&path).unwrap();
    assert_eq!(back, recs);

    // Re-exporting what was read gives the same bytes.
    let again = dir.path().join("again.csv");
    write_records_csv(&back, &again).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&again).unwrap()
    );
}

#[test]
fn comparison_from_records_averages_rounds() {
    let mut recs = records(300, "HT", 0);
    recs.extend(records(300, "HT", 1).into_iter().map(|mut r| {
        r.pred_label = r.true_label;
        r
    }));
    let spec = comparison_from_records(&recs, 50, "t").unwrap();
    assert_eq!(spec.series.len(), 1);
    let r0 = windowed_accuracy(&recs[..300], 50).unwrap();
    for (i, v) in spec.series[0].data.values.iter().enumerate() {
        assert!((v - (r0.values[i] + 1.0) / 2.0).abs() < 1e-12);
    }
}

#[test]
fn empty_records_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        write_records_csv(&[], &dir.path().join("x.csv")),
        Err(Error::EmptySeries)
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn real_targets_round_trip_exactly(values in prop::collection::vec(-1e12f64..1e12, 1..50)) {
        let recs: Vec<PrequentialRecord> = values
            .iter()
            .enumerate()
            .map(|(i, v)| PrequentialRecord {
                step: i as u64,
                true_label: Target::Real(*v),
                pred_label: Target::Real(v / 3.0),
                queried: true,
                model: "KNN".into(),
                stream: "hyperplane".into(),
                round: 0,
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_records_csv(&recs, &path).unwrap();
        prop_assert_eq!(read_records_csv(&path).unwrap(), recs);
    }

    #[test]
    fn windowed_accuracy_matches_direct_mean(bits in prop::collection::vec(any::<bool>(), 1..300), window in 1usize..60) {
        let recs: Vec<PrequentialRecord> = bits
            .iter()
            .enumerate()
            .map(|(i, ok)| PrequentialRecord {
                step: i as u64,
                true_label: Target::Class(1),
                pred_label: Target::Class(usize::from(*ok)),
                queried: true,
                model: "m".into(),
                stream: "s".into(),
                round: 0,
            })
            .collect();
        let series = windowed_accuracy(&recs, window).unwrap();
        for i in 0..bits.len() {
            let lo = (i + 1).saturating_sub(window);
            let hits = bits[lo..=i].iter().filter(|b| **b).count();
            let expected = hits as f64 / (i + 1 - lo) as f64;
            prop_assert!((series.values[i] - expected).abs() < 1e-9);
        }
    }
}
