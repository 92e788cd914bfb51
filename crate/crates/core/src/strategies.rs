//! Active-learning query strategies under a labeling budget.
//!
//! A strategy sees the current prediction's class probabilities and decides
//! whether the true label is requested. Unqueried labels are discarded.
//! Budget spend is the lifetime ratio `queried / seen`.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetState {
    budget: f64,
    seen: u64,
    queried: u64,
}

impl BudgetState {
    pub fn new(budget: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&budget) {
            return Err(Error::InvalidArgument(format!(
                "budget {budget} outside [0, 1]"
            )));
        }
        Ok(Self {
            budget,
            seen: 0,
            queried: 0,
        })
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn queried(&self) -> u64 {
        self.queried
    }

    pub fn spend(&self) -> f64 {
        if self.seen == 0 {
            0.0
        } else {
            self.queried as f64 / self.seen as f64
        }
    }

    /// Hard gate: no query once spend has reached the budget. A full budget
    /// (`b = 1`) never closes.
    pub fn is_open(&self) -> bool {
        self.budget >= 1.0 || self.spend() < self.budget
    }

    fn record(&mut self, queried: bool) -> bool {
        self.seen += 1;
        if queried {
            self.queried += 1;
        }
        queried
    }
}

pub trait QueryStrategy: Send {
    /// Decides for the current instance and updates the bookkeeping.
    fn should_query(&mut self, proba: &[f64]) -> bool;

    fn budget(&self) -> &BudgetState;

    /// Whether decisions depend on class probabilities.
    fn needs_proba(&self) -> bool;
}

fn max_proba(proba: &[f64]) -> f64 {
    proba.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Whether a prediction counts as uncertain at threshold `theta`. At
/// `theta >= 1` every prediction is uncertain, including one-hot vectors.
fn is_uncertain(proba: &[f64], theta: f64) -> bool {
    theta >= 1.0 || max_proba(proba) < theta
}

/// Requests every label.
#[derive(Debug, Clone)]
pub struct Supervised {
    budget: BudgetState,
}

impl Default for Supervised {
    fn default() -> Self {
        Self {
            budget: BudgetState::new(1.0).expect("valid budget"),
        }
    }
}

impl QueryStrategy for Supervised {
    fn should_query(&mut self, _proba: &[f64]) -> bool {
        self.budget.record(true)
    }

    fn budget(&self) -> &BudgetState {
        &self.budget
    }

    fn needs_proba(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RandomConfig {
    pub budget: f64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        Self { budget: 0.1 }
    }
}

/// Queries each instance independently with probability `b`.
#[derive(Debug, Clone)]
pub struct RandomStrategy {
    budget: BudgetState,
    rng: StreamRng,
}

impl RandomStrategy {
    pub fn new(cfg: &RandomConfig, seed: u64) -> Result<Self> {
        Ok(Self {
            budget: BudgetState::new(cfg.budget)?,
            rng: StreamRng::new(seed),
        })
    }
}

impl QueryStrategy for RandomStrategy {
    fn should_query(&mut self, _proba: &[f64]) -> bool {
        let u = self.rng.uniform();
        let q = u < self.budget.budget;
        self.budget.record(q)
    }

    fn budget(&self) -> &BudgetState {
        &self.budget
    }

    fn needs_proba(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FixedUncertaintyConfig {
    pub budget: f64,
    pub theta: f64,
}

impl Default for FixedUncertaintyConfig {
    fn default() -> Self {
        Self {
            budget: 0.1,
            theta: 0.9,
        }
    }
}

/// Queries iff the top class probability is below a fixed threshold and the
/// budget is open.
#[derive(Debug, Clone)]
pub struct FixedUncertainty {
    theta: f64,
    budget: BudgetState,
}

impl FixedUncertainty {
    pub fn new(cfg: &FixedUncertaintyConfig) -> Result<Self> {
        if !(cfg.theta > 0.0 && cfg.theta <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "theta {} outside (0, 1]",
                cfg.theta
            )));
        }
        Ok(Self {
            theta: cfg.theta,
            budget: BudgetState::new(cfg.budget)?,
        })
    }
}

impl QueryStrategy for FixedUncertainty {
    fn should_query(&mut self, proba: &[f64]) -> bool {
        let q = self.budget.is_open() && is_uncertain(proba, self.theta);
        self.budget.record(q)
    }

    fn budget(&self) -> &BudgetState {
        &self.budget
    }

    fn needs_proba(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct VariableUncertaintyConfig {
    pub budget: f64,
    pub theta: f64,
    pub step: f64,
}

impl Default for VariableUncertaintyConfig {
    fn default() -> Self {
        Self {
            budget: 0.1,
            theta: 1.0,
            step: 0.01,
        }
    }
}

/// Uncertainty sampling with a self-adjusting threshold: the threshold
/// shrinks by `(1 - s)` after each query and grows by `(1 + s)` (capped at 1)
/// after each confident prediction. Closed budget leaves it unchanged.
///
/// Started with `b = 1` and `theta = 1` there is nothing to ration: every
/// label is requested and the threshold stays at 1.
#[derive(Debug, Clone)]
pub struct VariableUncertainty {
    theta: f64,
    step: f64,
    budget: BudgetState,
    unrationed: bool,
}

impl VariableUncertainty {
    pub fn new(cfg: &VariableUncertaintyConfig) -> Result<Self> {
        if !(cfg.theta > 0.0 && cfg.theta <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "theta {} outside (0, 1]",
                cfg.theta
            )));
        }
        if !(cfg.step > 0.0 && cfg.step < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "step {} outside (0, 1)",
                cfg.step
            )));
        }
        Ok(Self {
            theta: cfg.theta,
            step: cfg.step,
            budget: BudgetState::new(cfg.budget)?,
            unrationed: cfg.budget >= 1.0 && cfg.theta >= 1.0,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl QueryStrategy for VariableUncertainty {
    fn should_query(&mut self, proba: &[f64]) -> bool {
        if self.unrationed {
            return self.budget.record(true);
        }
        if !self.budget.is_open() {
            return self.budget.record(false);
        }
        if is_uncertain(proba, self.theta) {
            self.theta *= 1.0 - self.step;
            self.budget.record(true)
        } else {
            self.theta = (self.theta * (1.0 + self.step)).min(1.0);
            self.budget.record(false)
        }
    }

    fn budget(&self) -> &BudgetState {
        &self.budget
    }

    fn needs_proba(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn variable(budget: f64, theta: f64) -> VariableUncertainty {
        VariableUncertainty::new(&VariableUncertaintyConfig {
            budget,
            theta,
            step: 0.01,
        })
        .unwrap()
    }

    #[test]
    fn random_extremes() {
        let mut never = RandomStrategy::new(&RandomConfig { budget: 0.0 }, 1).unwrap();
        let mut always = RandomStrategy::new(&RandomConfig { budget: 1.0 }, 1).unwrap();
        for _ in 0..1_000 {
            assert!(!never.should_query(&[]));
            assert!(always.should_query(&[]));
        }
        assert_eq!(never.budget().spend(), 0.0);
        assert_eq!(always.budget().spend(), 1.0);
    }

    #[test]
    fn random_spend_close_to_budget() {
        let mut s = RandomStrategy::new(&RandomConfig { budget: 0.3 }, 2024).unwrap();
        for _ in 0..10_000 {
            s.should_query(&[]);
        }
        let spend = s.budget().spend();
        assert!((0.28..=0.32).contains(&spend), "spend {spend}");
    }

    #[test]
    fn fixed_threshold_and_gate() {
        let cfg = FixedUncertaintyConfig {
            budget: 0.5,
            theta: 0.8,
        };
        let mut s = FixedUncertainty::new(&cfg).unwrap();
        assert!(!s.should_query(&[0.9, 0.1]));
        assert!(s.should_query(&[0.55, 0.45]));
        // spend is now 1/2 >= 0.5: closed regardless of proba
        assert!(!s.should_query(&[0.5, 0.5]));
        assert_eq!(s.budget().seen(), 3);
        assert_eq!(s.budget().queried(), 1);
    }

    #[test]
    fn variable_threshold_updates() {
        let mut s = variable(1.0, 0.8);
        assert!(!s.should_query(&[0.9, 0.1]));
        assert!((s.theta() - 0.808).abs() < 1e-12);

        let mut s = variable(1.0, 0.8);
        assert!(s.should_query(&[0.6, 0.4]));
        assert!((s.theta() - 0.792).abs() < 1e-12);
    }

    #[test]
    fn variable_closed_budget_keeps_theta() {
        let mut s = variable(0.1, 0.8);
        assert!(s.should_query(&[0.6, 0.4]));
        let theta = s.theta();
        assert!(!s.should_query(&[0.6, 0.4]));
        assert_eq!(s.theta(), theta);
    }

    #[test]
    fn full_budget_and_unit_theta_query_everything() {
        let mut s = variable(1.0, 1.0);
        for p in [[1.0, 0.0], [0.5, 0.5], [0.0, 1.0], [0.99, 0.01]] {
            assert!(s.should_query(&p));
        }
        assert_eq!(s.budget().spend(), 1.0);
    }

    #[test]
    fn alternating_stream_spend_near_budget() {
        let mut s = variable(0.1, 1.0);
        for t in 0..10_000 {
            let p = if t % 2 == 0 {
                [0.99, 0.01]
            } else {
                [0.55, 0.45]
            };
            s.should_query(&p);
        }
        let spend = s.budget().spend();
        assert!((0.08..=0.12).contains(&spend), "spend {spend}");
    }

    #[test]
    fn invalid_parameters() {
        assert!(BudgetState::new(1.5).is_err());
        assert!(FixedUncertainty::new(&FixedUncertaintyConfig {
            budget: 0.1,
            theta: 0.0
        })
        .is_err());
        assert!(VariableUncertainty::new(&VariableUncertaintyConfig {
            budget: 0.1,
            theta: 1.0,
            step: 1.0
        })
        .is_err());
    }

    proptest! {
        #[test]
        fn spend_gate_and_theta_range(
            budget in 0.0f64..1.0,
            maxes in proptest::collection::vec(0.5f64..=1.0, 1..400),
        ) {
            let mut v = variable(budget, 1.0);
            let mut f = FixedUncertainty::new(&FixedUncertaintyConfig { budget, theta: 0.9 }).unwrap();
            for m in maxes {
                let p = [m, 1.0 - m];
                v.should_query(&p);
                f.should_query(&p);
                for b in [v.budget(), f.budget()] {
                    prop_assert!(b.queried() <= b.seen());
                    prop_assert!(b.spend() <= budget + 1.0 / b.seen() as f64 + 1e-12);
                }
                prop_assert!(v.theta() > 0.0 && v.theta() <= 1.0);
            }
        }
    }
}
