use proptest::prelude::*;
use streamlearn::streams::*;
use streamlearn::{StreamRng, Target};

fn csv_round_trip(stream: &mut dyn Stream, twin: &mut dyn Stream, n: usize, task: Task) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("export.csv");
    assert_eq!(write_stream_csv(stream, n, &path).unwrap(), n);
    let mut cfg = CsvStreamConfig::new(&path);
    cfg.task = task;
    let mut back = CsvStream::open(&cfg).unwrap();
    assert_eq!(back.len(), n);
    for _ in 0..n {
        let a = twin.next_instance().unwrap().unwrap();
        let b = back.next_instance().unwrap().unwrap();
        assert_eq!(a, b);
    }
    assert!(back.next_instance().unwrap().is_none());
}

#[test]
fn sea_export_reingests_bit_exact() {
    let cfg = SeaConfig {
        noise_rate: 0.1,
        ..SeaConfig::default()
    };
    let mut a = SeaStream::from_config(&cfg, 5).unwrap();
    let mut b = SeaStream::from_config(&cfg, 5).unwrap();
    csv_round_trip(&mut a, &mut b, 2000, Task::Classification);
}

#[test]
fn hyperplane_regression_export_reingests_bit_exact() {
    let cfg = HyperplaneConfig {
        n_features: 4,
        task: Task::Regression,
        ..Default::default()
    };
    let mut a = HyperplaneStream::from_config(&cfg, 6).unwrap();
    let mut b = HyperplaneStream::from_config(&cfg, 6).unwrap();
    csv_round_trip(&mut a, &mut b, 1000, Task::Regression);
}

#[test]
fn gradual_mixing_frequency_follows_the_logistic_curve() {
    let schedule = DriftSchedule {
        position: 5000,
        width: 1000,
        before: 0u8,
        after: 1u8,
    };
    let mut rng = StreamRng::new(77);
    for t in [4000u64, 4500, 5000, 5250, 6000] {
        let expected = 1.0 / (1.0 + (-4.0 * (t as f64 - 5000.0) / 1000.0).exp());
        let hits = (0..10_000)
            .filter(|_| *schedule.select(t, rng.uniform()) == 1)
            .count();
        let freq = hits as f64 / 10_000.0;
        assert!(
            (freq - expected).abs() <= 0.02,
            "t={t}: {freq} vs {expected}"
        );
    }
}

#[test]
fn sea_labels_match_threshold_rule_before_and_after_drift() {
    let cfg = SeaConfig {
        theta: 8.0,
        theta_after: Some(9.5),
        drift: DriftParams {
            drift_position: Some(1000),
            drift_width: 0,
        },
        ..SeaConfig::default()
    };
    let mut s = SeaStream::from_config(&cfg, 1).unwrap();
    for inst in s.take_instances(2000).unwrap() {
        let theta = if inst.index < 1000 { 8.0 } else { 9.5 };
        let f = &inst.features;
        assert!(f.iter().all(|v| (0.0..10.0).contains(v)));
        let expected = usize::from(f[0] + f[1] <= theta);
        assert_eq!(inst.label, Some(Target::Class(expected)));
    }
}

#[test]
fn hyperplane_labels_match_the_plane() {
    let w = vec![0.3, -0.8, 0.5];
    let cfg = HyperplaneConfig {
        n_features: 3,
        weights: Some(w.clone()),
        bias: Some(0.1),
        ..Default::default()
    };
    let mut s = HyperplaneStream::from_config(&cfg, 2).unwrap();
    let mut ones = 0;
    for inst in s.take_instances(3000).unwrap() {
        let score: f64 = inst
            .features
            .iter()
            .zip(&w)
            .map(|(x, w)| x * w)
            .sum::<f64>()
            + 0.1;
        let expected = usize::from(score >= 0.0);
        ones += expected;
        assert_eq!(inst.label, Some(Target::Class(expected)));
    }
    assert!(ones > 0 && ones < 3000);
}

#[test]
fn indexes_are_consecutive_from_zero() {
    let mut s = SeaStream::from_config(&SeaConfig::default(), 3).unwrap();
    for (i, inst) in s.take_instances(500).unwrap().iter().enumerate() {
        assert_eq!(inst.index, i as u64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generators_are_deterministic_per_seed(seed in any::<u64>(), d in 1usize..8) {
        let cfg = HyperplaneConfig { n_features: d, noise_rate: 0.05, ..Default::default() };
        let a = HyperplaneStream::from_config(&cfg, seed).unwrap().take_instances(200).unwrap();
        let b = HyperplaneStream::from_config(&cfg, seed).unwrap().take_instances(200).unwrap();
        prop_assert_eq!(&a, &b);
        let c = HyperplaneStream::from_config(&cfg, seed.wrapping_add(1)).unwrap().take_instances(200).unwrap();
        prop_assert_ne!(&a, &c);

        let sea = SeaConfig { noise_rate: 0.1, ..SeaConfig::default() };
        let a = SeaStream::from_config(&sea, seed).unwrap().take_instances(200).unwrap();
        let b = SeaStream::from_config(&sea, seed).unwrap().take_instances(200).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn mix_is_monotone_in_time(position in 0u64..10_000, width in 0u64..5_000, t in 0u64..20_000) {
        let a = concept_mix(t, position, width);
        let b = concept_mix(t + 1, position, width);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
    }
}
