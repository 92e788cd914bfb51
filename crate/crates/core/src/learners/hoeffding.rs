//! Hoeffding tree (VFDT) for numeric attributes.
//!
//! Each leaf keeps, per feature, a Gaussian summary of the values observed
//! for every class plus the observed range. Every `grace_period` instances a
//! leaf scores ten evenly spaced thresholds per feature by information gain
//! and splits when the best feature beats the runner-up by more than the
//! Hoeffding bound, or when the bound itself drops below the tie threshold.
//!
//! Leaves predict their class frequencies by default. The naive-Bayes
//! adaptive mode reuses the Gaussian summaries for a naive Bayes estimate and
//! picks, per leaf, whichever of the two has been right more often on the
//! instances that reached it.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::instance::{Instance, StreamSchema};
use crate::learner::{argmax, check_batch, normalize_proba, Learner, LearnerCaps};

const N_CANDIDATES: usize = 10;

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum LeafPrediction {
    #[default]
    Majority,
    NaiveBayesAdaptive,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct HtConfig {
    pub delta: f64,
    pub tie_threshold: f64,
    pub grace_period: u64,
    pub max_depth: Option<usize>,
    pub leaf_prediction: LeafPrediction,
}

impl Default for HtConfig {
    fn default() -> Self {
        Self {
            delta: 1e-7,
            tie_threshold: 0.05,
            grace_period: 200,
            max_depth: None,
            leaf_prediction: LeafPrediction::Majority,
        }
    }
}

impl HtConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "delta {} outside (0, 1)",
                self.delta
            )));
        }
        if !(self.tie_threshold > 0.0) {
            return Err(Error::InvalidArgument(
                "tie_threshold must be positive".into(),
            ));
        }
        if self.grace_period == 0 {
            return Err(Error::InvalidArgument(
                "grace_period must be positive".into(),
            ));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidArgument("max_depth must be positive".into()));
        }
        Ok(())
    }
}

/// `sqrt(R^2 ln(1/delta) / (2n))`.
pub fn hoeffding_bound(range: f64, delta: f64, n: u64) -> Result<f64> {
    if !(range > 0.0 && range.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "range {range} must be positive"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta {delta} outside (0, 1]"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok((range * range * (1.0 / delta).ln() / (2.0 * n as f64)).sqrt())
}

/// Weighted running mean and variance (West's update).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GaussianEstimator {
    weight: f64,
    mean: f64,
    m2: f64,
}

impl GaussianEstimator {
    pub fn update(&mut self, x: f64, w: f64) {
        if w <= 0.0 {
            return;
        }
        self.weight += w;
        let delta = x - self.mean;
        self.mean += w * delta / self.weight;
        self.m2 += w * delta * (x - self.mean);
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.weight > 1.0 {
            (self.m2 / (self.weight - 1.0)).max(0.0)
        } else {
            0.0
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Estimated weight at or below `v`.
    pub fn mass_below(&self, v: f64) -> f64 {
        if self.weight <= 0.0 {
            return 0.0;
        }
        let sd = self.std_dev();
        if sd <= 1e-12 {
            return if self.mean <= v { self.weight } else { 0.0 };
        }
        self.weight * normal_cdf((v - self.mean) / sd)
    }
}

const MIN_STD: f64 = 1e-6;

fn gaussian_log_density(g: &GaussianEstimator, x: f64) -> f64 {
    let sd = g.std_dev().max(MIN_STD);
    let z = (x - g.mean()) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Per-class Gaussian summaries of one feature at a leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureObserver {
    pub per_class: Vec<GaussianEstimator>,
    pub min: f64,
    pub max: f64,
}

impl FeatureObserver {
    fn new(n_classes: usize) -> Self {
        Self {
            per_class: vec![GaussianEstimator::default(); n_classes],
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn update(&mut self, x: f64, class: usize, w: f64) {
        self.per_class[class].update(x, w);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    /// Ten evenly spaced interior points of the observed range.
    pub fn candidate_thresholds(&self) -> Vec<f64> {
        if !(self.max > self.min) {
            return Vec::new();
        }
        let span = self.max - self.min;
        (1..=N_CANDIDATES)
            .map(|i| self.min + span * i as f64 / (N_CANDIDATES + 1) as f64)
            .collect()
    }

    /// Estimated class weights on each side of `x <= threshold`.
    pub fn split_distribution(&self, threshold: f64) -> (Vec<f64>, Vec<f64>) {
        let left: Vec<f64> = self
            .per_class
            .iter()
            .map(|g| g.mass_below(threshold))
            .collect();
        let right = self
            .per_class
            .iter()
            .zip(&left)
            .map(|(g, l)| (g.weight() - l).max(0.0))
            .collect();
        (left, right)
    }
}

fn entropy(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.log2()
        })
        .sum()
}

fn info_gain(parent: &[f64], left: &[f64], right: &[f64]) -> f64 {
    let total: f64 = parent.iter().sum();
    let wl: f64 = left.iter().sum();
    let wr: f64 = right.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    entropy(parent) - (wl / total) * entropy(left) - (wr / total) * entropy(right)
}

/// A tree node. Internal nodes carry a split `x[feature] <= value` and keep
/// the class counts they had while still a leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct HtNode {
    pub split_feature: Option<usize>,
    pub split_value: Option<f64>,
    /// Arena indexes of the (left, right) children.
    pub children: Option<(usize, usize)>,
    pub class_counts: Vec<f64>,
    pub n_since_eval: u64,
    pub depth: usize,
    pub observers: Vec<FeatureObserver>,
    /// Weight of instances the majority / naive Bayes estimate got right
    /// before learning them (naive-Bayes adaptive leaves only).
    mc_correct: f64,
    nb_correct: f64,
}

impl HtNode {
    fn leaf(n_features: usize, n_classes: usize, depth: usize) -> Self {
        Self {
            split_feature: None,
            split_value: None,
            children: None,
            class_counts: vec![0.0; n_classes],
            n_since_eval: 0,
            depth,
            observers: (0..n_features)
                .map(|_| FeatureObserver::new(n_classes))
                .collect(),
            mc_correct: 0.0,
            nb_correct: 0.0,
        }
    }

    fn majority_proba(&self) -> Vec<f64> {
        normalize_proba(self.class_counts.clone())
    }

    /// Gaussian naive Bayes over the leaf's summaries.
    pub fn naive_bayes_proba(&self, x: &[f64]) -> Vec<f64> {
        let total = self.total_weight();
        if total <= 0.0 {
            return normalize_proba(vec![0.0; self.class_counts.len()]);
        }
        let log_post: Vec<f64> = self
            .class_counts
            .iter()
            .enumerate()
            .map(|(c, &n_c)| {
                if n_c <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let mut lp = (n_c / total).ln();
                for (obs, &v) in self.observers.iter().zip(x) {
                    lp += gaussian_log_density(&obs.per_class[c], v);
                }
                lp
            })
            .collect();
        let max = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return self.majority_proba();
        }
        normalize_proba(log_post.iter().map(|lp| (lp - max).exp()).collect())
    }

    fn leaf_proba(&self, x: &[f64], mode: LeafPrediction) -> Vec<f64> {
        match mode {
            LeafPrediction::NaiveBayesAdaptive if self.nb_correct > self.mc_correct => {
                self.naive_bayes_proba(x)
            }
            _ => self.majority_proba(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn total_weight(&self) -> f64 {
        self.class_counts.iter().sum()
    }

    fn observe(&mut self, x: &[f64], class: usize, w: f64) {
        self.class_counts[class] += w;
        self.n_since_eval += 1;
        for (obs, &v) in self.observers.iter_mut().zip(x) {
            obs.update(v, class, w);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDecision {
    /// `(feature, threshold)` when the leaf should split.
    pub split: Option<(usize, f64)>,
    pub best_gain: f64,
    pub second_gain: f64,
    pub epsilon: f64,
}

/// Best threshold and its gain for one feature, `None` without candidates.
fn best_threshold(node: &HtNode, feature: usize) -> Option<(f64, f64)> {
    let obs = &node.observers[feature];
    let mut best: Option<(f64, f64)> = None;
    for t in obs.candidate_thresholds() {
        let (l, r) = obs.split_distribution(t);
        let g = info_gain(&node.class_counts, &l, &r);
        if best.is_none_or(|(_, bg)| g > bg) {
            best = Some((t, g));
        }
    }
    best
}

/// Split evaluation for a leaf with `n_classes` possible classes.
///
/// Gains are ranked over features (smaller index first on ties); a single
/// feature competes with the zero-gain null split. The leaf splits iff the
/// best gain is positive and `best - second > eps` or `eps < tie_threshold`,
/// where `eps = hoeffding_bound(log2(C), delta, n_leaf)`.
pub fn ht_try_split(leaf: &HtNode, cfg: &HtConfig, n_classes: usize) -> SplitDecision {
    let n = leaf.total_weight();
    let range = (n_classes.max(2) as f64).log2();
    let epsilon =
        hoeffding_bound(range, cfg.delta, (n.round() as u64).max(1)).unwrap_or(f64::INFINITY);
    let no_split = |best_gain, second_gain| SplitDecision {
        split: None,
        best_gain,
        second_gain,
        epsilon,
    };
    let observed = leaf.class_counts.iter().filter(|&&c| c > 0.0).count();
    if observed < 2 {
        return no_split(0.0, 0.0);
    }
    let mut ranked: Vec<(usize, f64, f64)> = (0..leaf.observers.len())
        .filter_map(|f| best_threshold(leaf, f).map(|(t, g)| (f, t, g)))
        .collect();
    ranked.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    let Some(&(feature, threshold, best_gain)) = ranked.first() else {
        return no_split(0.0, 0.0);
    };
    let second_gain = ranked.get(1).map_or(0.0, |r| r.2.max(0.0));
    if best_gain > 0.0 && (best_gain - second_gain > epsilon || epsilon < cfg.tie_threshold) {
        SplitDecision {
            split: Some((feature, threshold)),
            best_gain,
            second_gain,
            epsilon,
        }
    } else {
        no_split(best_gain, second_gain)
    }
}

/// Classification Hoeffding tree.
#[derive(Debug, Clone)]
pub struct HoeffdingTree {
    schema: StreamSchema,
    cfg: HtConfig,
    n_classes: usize,
    nodes: Vec<HtNode>,
    fitted: bool,
    n_seen: u64,
}

impl HoeffdingTree {
    pub fn new(schema: StreamSchema, cfg: HtConfig) -> Result<Self> {
        cfg.validate()?;
        let n_classes = super::require_classification(&schema, "HoeffdingTree")?;
        let root = HtNode::leaf(schema.n_features, n_classes, 0);
        Ok(Self {
            schema,
            cfg,
            n_classes,
            nodes: vec![root],
            fitted: false,
            n_seen: 0,
        })
    }

    /// An empty tree that accepts `partial_fit` without a pretraining batch;
    /// used for ensemble members grown from scratch.
    pub fn fresh(schema: StreamSchema, cfg: HtConfig) -> Result<Self> {
        let mut tree = Self::new(schema, cfg)?;
        tree.fitted = true;
        Ok(tree)
    }

    pub fn config(&self) -> &HtConfig {
        &self.cfg
    }

    pub fn nodes(&self) -> &[HtNode] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Index of the leaf reached by `x`; `x[f] <= v` goes left.
    pub fn route(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        while let (Some((left, right)), Some(f), Some(v)) = (
            self.nodes[idx].children,
            self.nodes[idx].split_feature,
            self.nodes[idx].split_value,
        ) {
            idx = if x[f] <= v { left } else { right };
        }
        idx
    }

    fn learn(&mut self, inst: &Instance) -> Result<()> {
        self.schema.check(inst)?;
        let class = inst.require_class()?;
        let leaf = self.route(&inst.features);
        if self.cfg.leaf_prediction == LeafPrediction::NaiveBayesAdaptive {
            let node = &mut self.nodes[leaf];
            if argmax(&node.majority_proba()) == class {
                node.mc_correct += 1.0;
            }
            if argmax(&node.naive_bayes_proba(&inst.features)) == class {
                node.nb_correct += 1.0;
            }
        }
        self.nodes[leaf].observe(&inst.features, class, 1.0);
        self.n_seen += 1;

        let node = &self.nodes[leaf];
        let depth_ok = self.cfg.max_depth.is_none_or(|d| node.depth < d);
        if node.n_since_eval >= self.cfg.grace_period && depth_ok {
            let decision = ht_try_split(node, &self.cfg, self.n_classes);
            self.nodes[leaf].n_since_eval = 0;
            if let Some((feature, value)) = decision.split {
                self.split_leaf(leaf, feature, value);
            }
        }
        Ok(())
    }

    fn split_leaf(&mut self, leaf: usize, feature: usize, value: f64) {
        let depth = self.nodes[leaf].depth + 1;
        let left = self.nodes.len();
        for _ in 0..2 {
            self.nodes
                .push(HtNode::leaf(self.schema.n_features, self.n_classes, depth));
        }
        let node = &mut self.nodes[leaf];
        node.split_feature = Some(feature);
        node.split_value = Some(value);
        node.children = Some((left, left + 1));
        node.observers = Vec::new();
    }
}

impl Learner for HoeffdingTree {
    fn caps(&self) -> LearnerCaps {
        LearnerCaps {
            supports_multiclass: true,
            supports_regression: false,
            drift_adaptive: false,
        }
    }

    fn fit(&mut self, batch: &[Instance]) -> Result<()> {
        check_batch(batch)?;
        for inst in batch {
            self.schema.check(inst)?;
            inst.require_class()?;
        }
        self.nodes = vec![HtNode::leaf(self.schema.n_features, self.n_classes, 0)];
        self.n_seen = 0;
        for inst in batch {
            self.learn(inst)?;
        }
        self.fitted = true;
        Ok(())
    }

    fn partial_fit(&mut self, instance: &Instance) -> Result<()> {
        if !self.fitted {
            return Err(Error::NotFitted);
        }
        self.learn(instance)
    }

    fn predict_proba(&self, instance: &Instance) -> Result<Vec<f64>> {
        if !self.fitted {
            return Err(Error::NotFitted);
        }
        self.schema.check(&instance.unlabeled())?;
        let leaf = self.route(&instance.features);
        Ok(self.nodes[leaf].leaf_proba(&instance.features, self.cfg.leaf_prediction))
    }

    fn is_fitted(&self) -> bool {
        self.fitted
    }

    fn n_seen(&self) -> u64 {
        self.n_seen
    }
}
