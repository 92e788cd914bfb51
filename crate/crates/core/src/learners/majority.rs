use crate::error::{Error, Result};
use crate::instance::{Instance, StreamSchema};
use crate::learner::{check_batch, normalize_proba, Learner, LearnerCaps};

/// Predicts the class frequencies seen so far.
#[derive(Debug, Clone)]
pub struct MajorityClass {
    schema: StreamSchema,
    counts: Vec<f64>,
    fitted: bool,
    n_seen: u64,
}

impl MajorityClass {
    pub fn new(schema: StreamSchema) -> Result<Self> {
        let n_classes = super::require_classification(&schema, "MajorityClass")?;
        Ok(Self {
            schema,
            counts: vec![0.0; n_classes],
            fitted: false,
            n_seen: 0,
        })
    }

    pub fn class_counts(&self) -> &[f64] {
        &self.counts
    }

    fn learn(&mut self, inst: &Instance) -> Result<()> {
        self.schema.check(inst)?;
        let c = inst.require_class()?;
        self.counts[c] += 1.0;
        self.n_seen += 1;
        Ok(())
    }
}

impl Learner for MajorityClass {
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
        }
        self.counts.iter_mut().for_each(|c| *c = 0.0);
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
        Ok(normalize_proba(self.counts.clone()))
    }

    fn is_fitted(&self) -> bool {
        self.fitted
    }

    fn n_seen(&self) -> u64 {
        self.n_seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Target;

    fn inst(i: u64, c: usize) -> Instance {
        Instance::labeled_class(i, vec![0.0], c)
    }

    fn learner() -> MajorityClass {
        MajorityClass::new(StreamSchema::classification(1, 2)).unwrap()
    }

    #[test]
    fn fit_counts_classes() {
        let mut m = learner();
        m.fit(&[inst(0, 0), inst(1, 0), inst(2, 1)]).unwrap();
        assert_eq!(m.class_counts(), &[2.0, 1.0]);
        assert_eq!(m.n_seen(), 3);
        let p = m.predict_proba(&inst(3, 0)).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15 && (p[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn partial_fit_then_tie_goes_to_smallest_class() {
        let mut m = learner();
        m.fit(&[inst(0, 0), inst(1, 0), inst(2, 1)]).unwrap();
        m.partial_fit(&inst(3, 1)).unwrap();
        assert_eq!(m.class_counts(), &[2.0, 2.0]);
        assert_eq!(m.n_seen(), 4);
        assert_eq!(m.predict(&inst(4, 1)).unwrap().label, Target::Class(0));
    }

    #[test]
    fn contract_errors() {
        let mut m = learner();
        assert!(matches!(m.fit(&[]), Err(Error::InvalidPretrain(_))));
        assert!(matches!(m.partial_fit(&inst(0, 0)), Err(Error::NotFitted)));
        assert!(matches!(m.predict(&inst(0, 0)), Err(Error::NotFitted)));
        assert!(matches!(
            m.fit(&[Instance::new(0, vec![1.0], None)]),
            Err(Error::MissingLabel { index: 0 })
        ));
        m.fit(&[inst(0, 0)]).unwrap();
        assert!(matches!(
            m.partial_fit(&Instance::labeled_class(1, vec![f64::NAN], 0)),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            m.partial_fit(&Instance::new(1, vec![1.0], None)),
            Err(Error::MissingLabel { .. })
        ));
    }

    #[test]
    fn regression_schema_is_rejected() {
        assert!(matches!(
            MajorityClass::new(StreamSchema::regression(2)),
            Err(Error::Unsupported(_))
        ));
    }
}
