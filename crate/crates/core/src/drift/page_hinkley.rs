use serde::Deserialize;

use super::{DriftDetector, DriftLevel};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PageHinkleyConfig {
    /// Tolerated slack per observation.
    pub delta: f64,
    /// Alarm threshold on `m_t - M_t`.
    pub lambda: f64,
    /// Forgetting factor for the running mean; 1 gives the plain mean.
    pub alpha: f64,
}

impl Default for PageHinkleyConfig {
    fn default() -> Self {
        Self {
            delta: 0.005,
            lambda: 50.0,
            alpha: 1.0,
        }
    }
}

/// Page-Hinkley test for an increase in the mean of a monitored value.
///
/// `m_t += x_t - mean_t - delta`, `M_t = min(M_t, m_t)`; drift iff
/// `m_t - M_t > lambda`. There is no warning level.
#[derive(Debug, Clone)]
pub struct PageHinkley {
    cfg: PageHinkleyConfig,
    n: u64,
    weight: f64,
    mean: f64,
    cumulative: f64,
    minimum: f64,
    level: DriftLevel,
}

impl PageHinkley {
    pub fn new(cfg: PageHinkleyConfig) -> Self {
        Self {
            cfg,
            n: 0,
            weight: 0.0,
            mean: 0.0,
            cumulative: 0.0,
            minimum: 0.0,
            level: DriftLevel::Stable,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `m_t`.
    pub fn cumulative(&self) -> f64 {
        self.cumulative
    }

    /// `M_t`.
    pub fn minimum(&self) -> f64 {
        self.minimum
    }

    /// `m_t - M_t`.
    pub fn statistic(&self) -> f64 {
        self.cumulative - self.minimum
    }

    pub fn update_value(&mut self, x: f64) -> DriftLevel {
        self.n += 1;
        self.weight = self.cfg.alpha * self.weight + 1.0;
        self.mean += (x - self.mean) / self.weight;
        self.cumulative += x - self.mean - self.cfg.delta;
        self.minimum = if self.n == 1 {
            self.cumulative
        } else {
            self.minimum.min(self.cumulative)
        };
        self.level = if self.statistic() > self.cfg.lambda {
            DriftLevel::Drift
        } else {
            DriftLevel::Stable
        };
        self.level
    }
}

impl Default for PageHinkley {
    fn default() -> Self {
        Self::new(PageHinkleyConfig::default())
    }
}

impl DriftDetector for PageHinkley {
    fn update(&mut self, value: f64) -> DriftLevel {
        self.update_value(value)
    }

    fn level(&self) -> DriftLevel {
        self.level
    }

    fn reset(&mut self) {
        *self = PageHinkley::new(self.cfg.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamRng;

    #[test]
    fn first_observation_initializes_minimum() {
        let mut ph = PageHinkley::default();
        assert_eq!(ph.update_value(3.0), DriftLevel::Stable);
        assert_eq!(ph.minimum(), ph.cumulative());
        assert_eq!(ph.statistic(), 0.0);
    }

    #[test]
    fn constant_input_never_drifts() {
        let mut ph = PageHinkley::default();
        for _ in 0..100_000 {
            assert_eq!(ph.update_value(0.7), DriftLevel::Stable);
            assert!(ph.statistic() >= 0.0 && ph.statistic() <= 1e-9);
        }
    }

    #[test]
    fn recurrence_matches_direct_evaluation() {
        let mut rng = StreamRng::new(2);
        let xs: Vec<f64> = (0..500).map(|_| rng.normal()).collect();
        let mut ph = PageHinkley::default();
        let (mut mean, mut m, mut big_m) = (0.0f64, 0.0f64, f64::INFINITY);
        for (i, &x) in xs.iter().enumerate() {
            ph.update_value(x);
            mean += (x - mean) / (i + 1) as f64;
            m += x - mean - 0.005;
            big_m = big_m.min(m);
            assert!((ph.cumulative() - m).abs() < 1e-9);
            assert!((ph.minimum() - big_m).abs() < 1e-9);
        }
    }

    #[test]
    fn mean_shift_detected_within_200() {
        for seed in 0..10 {
            let mut rng = StreamRng::new(seed);
            let mut ph = PageHinkley::default();
            let mut at = None;
            for t in 0..2_000 {
                let shift = if t < 1_000 { 0.0 } else { 1.0 };
                if ph.update_value(shift + 0.1 * rng.normal()) == DriftLevel::Drift {
                    at = Some(t);
                    break;
                }
            }
            let t = at.expect("no drift");
            assert!((1_000..1_200).contains(&t), "seed {seed}: {t}");
        }
    }

    #[test]
    fn reset_restores_initial_behavior() {
        let mut rng = StreamRng::new(8);
        let xs: Vec<f64> = (0..300).map(|_| rng.uniform()).collect();
        let mut a = PageHinkley::default();
        for _ in 0..1_000 {
            a.update_value(5.0);
        }
        a.reset();
        let mut b = PageHinkley::default();
        for &x in &xs {
            assert_eq!(a.update_value(x), b.update_value(x));
            assert_eq!(a.statistic(), b.statistic());
        }
    }

    #[test]
    fn forgetting_mean_tracks_recent_values() {
        let mut ph = PageHinkley::new(PageHinkleyConfig {
            alpha: 0.9,
            ..Default::default()
        });
        for _ in 0..200 {
            ph.update_value(0.0);
        }
        for _ in 0..200 {
            ph.update_value(1.0);
        }
        assert!(ph.mean() > 0.99);
    }
}
