use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground truth or predicted value of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Class(usize),
    Real(f64),
}

impl Target {
    pub fn class(self) -> Option<usize> {
        match self {
            Target::Class(c) => Some(c),
            Target::Real(_) => None,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Target::Class(c) => c as f64,
            Target::Real(v) => v,
        }
    }
}

/// One stream element.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub index: u64,
    pub features: Vec<f64>,
    pub label: Option<Target>,
}

impl Instance {
    pub fn new(index: u64, features: Vec<f64>, label: Option<Target>) -> Self {
        Self {
            index,
            features,
            label,
        }
    }

    pub fn labeled_class(index: u64, features: Vec<f64>, class: usize) -> Self {
        Self::new(index, features, Some(Target::Class(class)))
    }

    /// Copy of the instance with the label removed.
    pub fn unlabeled(&self) -> Self {
        Self {
            index: self.index,
            features: self.features.clone(),
            label: None,
        }
    }

    pub fn require_label(&self) -> Result<Target> {
        self.label.ok_or(Error::MissingLabel { index: self.index })
    }

    pub fn require_class(&self) -> Result<usize> {
        match self.require_label()? {
            Target::Class(c) => Ok(c),
            Target::Real(_) => Err(Error::Schema(format!(
                "instance {} carries a real target where a class was expected",
                self.index
            ))),
        }
    }

    pub fn require_real(&self) -> Result<f64> {
        match self.require_label()? {
            Target::Real(v) => Ok(v),
            Target::Class(_) => Err(Error::Schema(format!(
                "instance {} carries a class where a real target was expected",
                self.index
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelKind {
    Classification { n_classes: usize },
    Regression,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamSchema {
    pub n_features: usize,
    pub feature_names: Vec<String>,
    pub label_kind: LabelKind,
    pub class_names: Vec<String>,
}

impl StreamSchema {
    /// Classification schema with default names `f0..` and `0..`.
    pub fn classification(n_features: usize, n_classes: usize) -> Self {
        Self {
            n_features,
            feature_names: (0..n_features).map(|i| format!("f{i}")).collect(),
            label_kind: LabelKind::Classification { n_classes },
            class_names: (0..n_classes).map(|c| c.to_string()).collect(),
        }
    }

    pub fn regression(n_features: usize) -> Self {
        Self {
            n_features,
            feature_names: (0..n_features).map(|i| format!("f{i}")).collect(),
            label_kind: LabelKind::Regression,
            class_names: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_features == 0 {
            return Err(Error::Schema("n_features must be positive".into()));
        }
        if self.feature_names.len() != self.n_features {
            return Err(Error::Schema(format!(
                "{} feature names for {} features",
                self.feature_names.len(),
                self.n_features
            )));
        }
        if let LabelKind::Classification { n_classes } = self.label_kind {
            if n_classes < 2 {
                return Err(Error::Schema(
                    "classification needs at least 2 classes".into(),
                ));
            }
            if self.class_names.len() != n_classes {
                return Err(Error::Schema(format!(
                    "{} class names for {} classes",
                    self.class_names.len(),
                    n_classes
                )));
            }
        }
        Ok(())
    }

    pub fn n_classes(&self) -> Option<usize> {
        match self.label_kind {
            LabelKind::Classification { n_classes } => Some(n_classes),
            LabelKind::Regression => None,
        }
    }

    pub fn is_classification(&self) -> bool {
        matches!(self.label_kind, LabelKind::Classification { .. })
    }

    /// Checks feature length, finiteness and label range of an instance.
    pub fn check(&self, instance: &Instance) -> Result<()> {
        if instance.features.len() != self.n_features {
            return Err(Error::Schema(format!(
                "instance {} has {} features, schema expects {}",
                instance.index,
                instance.features.len(),
                self.n_features
            )));
        }
        if let Some(pos) = instance.features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Schema(format!(
                "instance {} feature {} is not finite",
                instance.index, pos
            )));
        }
        match (instance.label, self.label_kind) {
            (None, _) => Ok(()),
            (Some(Target::Class(c)), LabelKind::Classification { n_classes }) if c < n_classes => {
                Ok(())
            }
            (Some(Target::Class(c)), LabelKind::Classification { n_classes }) => {
                Err(Error::Schema(format!(
                    "instance {} label {} outside [0, {})",
                    instance.index, c, n_classes
                )))
            }
            (Some(Target::Real(v)), LabelKind::Regression) if v.is_finite() => Ok(()),
            (Some(label), kind) => Err(Error::Schema(format!(
                "instance {} label {:?} does not match {:?}",
                instance.index, label, kind
            ))),
        }
    }
}

/// Output of a learner for one instance. `proba` is empty for regression.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: Target,
    pub proba: Vec<f64>,
}

impl Prediction {
    /// Builds a classification prediction from a probability vector; the
    /// label is its argmax (smallest index on ties).
    pub fn from_proba(proba: Vec<f64>) -> Self {
        let label = Target::Class(crate::learner::argmax(&proba));
        Self { label, proba }
    }

    pub fn real(value: f64) -> Self {
        Self {
            label: Target::Real(value),
            proba: Vec::new(),
        }
    }
}
