//! Base regression learners, the learner registry and the cross-validation
//! harness.
//!
//! Registry names follow the short names of the classic QSAR baselines:
//!
//! | name      | algorithm                                             |
//! |-----------|-------------------------------------------------------|
//! | `lm`      | ordinary least squares                                |
//! | `ridge`   | ridge regression                                      |
//! | `glmnet`  | elastic net by coordinate descent, one default lambda |
//! | `fnn`     | k-nearest-neighbour regression (k = 1)                |
//! | `rtree`   | CART regression tree                                  |
//! | `rforest` | random forest of CART trees                           |
//! | `gbm`     | gradient boosted stumps                               |
//! | `ksvm`    | kernel ridge regression, RBF kernel                   |
//! | `ksvmfp`  | kernel ridge regression, Tanimoto kernel              |
//!
//! `ksvm`/`ksvmfp` use kernel ridge regression in place of support vector
//! regression.

mod cv;
pub(crate) mod forest;
mod gbm;
mod kernel;
mod knn;
mod linear;
mod params;
pub(crate) mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Representation};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use cv::{cross_validate, evaluate_all, fold_assignment, CvResult};
pub(crate) use cv::evaluate_cell;
pub use forest::RandomForest;
pub use gbm::GradientBoosting;
pub use kernel::{rbf_kernel, tanimoto_kernel, KernelRidge};
pub use knn::NearestNeighbors;
pub use linear::{ElasticNet, LeastSquares};
pub use params::{Hyperparams, ParamValue};
pub use tree::{FittedTree, RegressionTree, TreeParams};

/// A fitted predictor.
pub trait Regressor: Send + Sync {
    fn predict_row(&self, row: &[f64]) -> f64;
}

/// A learning algorithm that can be registered under a name.
pub trait Learner: Send + Sync {
    fn name(&self) -> &str;

    fn validate(&self, params: &Hyperparams) -> Result<()>;

    /// Whether the learner only accepts binary features.
    fn binary_only(&self) -> bool {
        false
    }

    fn fit(
        &self,
        params: &Hyperparams,
        x: &Matrix,
        y: &[f64],
        seed: u64,
    ) -> Result<Box<dyn Regressor>>;
}

/// Registry key plus hyperparameter overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub name: String,
    #[serde(default)]
    pub hyperparams: Hyperparams,
}

impl LearnerSpec {
    pub fn new(name: impl Into<String>) -> Self {
        LearnerSpec {
            name: name.into(),
            hyperparams: Hyperparams::default(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<ParamValue>) -> Self {
        self.hyperparams.insert(key, value.into());
        self
    }
}

/// A learner paired with a dataset representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub learner: LearnerSpec,
    pub representation: Representation,
}

impl Strategy {
    pub fn new(learner: LearnerSpec, representation: Representation) -> Self {
        Strategy {
            learner,
            representation,
        }
    }

    pub fn named(learner: &str, representation: Representation) -> Self {
        Strategy::new(LearnerSpec::new(learner), representation)
    }

    /// `<learner>.<representation token>`, e.g. `rforest.fpFCFP4`.
    pub fn id(&self) -> String {
        format!("{}.{}", self.learner.name, self.representation.token())
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Model bound to the feature width it was trained on.
pub struct TrainedModel {
    learner: String,
    width: usize,
    inner: Box<dyn Regressor>,
}

impl fmt::Debug for TrainedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TrainedModel")
            .field("learner", &self.learner)
            .field("width", &self.width)
            .finish_non_exhaustive()
    }
}

impl TrainedModel {
    pub fn learner(&self) -> &str {
        &self.learner
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.width {
            return Err(Error::FeatureWidth {
                expected: self.width,
                found: row.len(),
            });
        }
        Ok(self.inner.predict_row(row))
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Result<Vec<f64>> {
        (0..x.rows()).map(|r| self.predict(x.row(r))).collect()
    }
}

#[derive(Clone)]
pub struct Registry {
    learners: BTreeMap<String, Arc<dyn Learner>>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.learners.keys()).finish()
    }
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Registry::empty();
        r.register(LeastSquares::ols());
        r.register(LeastSquares::ridge());
        r.register(ElasticNet);
        r.register(NearestNeighbors);
        r.register(RegressionTree);
        r.register(RandomForest);
        r.register(GradientBoosting);
        r.register(KernelRidge::rbf());
        r.register(KernelRidge::tanimoto());
        r
    }
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            learners: BTreeMap::new(),
        }
    }

    /// Adds (or replaces) a learner under its own name.
    pub fn register<L: Learner + 'static>(&mut self, learner: L) {
        self.learners
            .insert(learner.name().to_string(), Arc::new(learner));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.learners.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Result<&dyn Learner> {
        self.learners
            .get(name)
            .map(|l| l.as_ref())
            .ok_or_else(|| Error::UnknownLearner(name.to_string()))
    }

    pub fn validate(&self, spec: &LearnerSpec) -> Result<()> {
        self.get(&spec.name)?.validate(&spec.hyperparams)
    }

    /// Checks the learner, its hyperparameters and the representation pairing.
    pub fn validate_strategy(&self, strategy: &Strategy) -> Result<()> {
        let learner = self.get(&strategy.learner.name)?;
        learner.validate(&strategy.learner.hyperparams)?;
        if learner.binary_only() && !strategy.representation.is_binary() {
            return Err(Error::InvalidPairing(format!(
                "{} only runs on binary fingerprints, not {}",
                strategy.learner.name, strategy.representation
            )));
        }
        Ok(())
    }

    pub fn fit_matrix(
        &self,
        spec: &LearnerSpec,
        x: &Matrix,
        y: &[f64],
        seed: u64,
    ) -> Result<TrainedModel> {
        if x.rows() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.rows(),
                right: y.len(),
            });
        }
        if y.is_empty() {
            return Err(Error::EmptyInput);
        }
        let learner = self.get(&spec.name)?;
        learner.validate(&spec.hyperparams)?;
        let inner = learner.fit(&spec.hyperparams, x, y, seed)?;
        Ok(TrainedModel {
            learner: spec.name.clone(),
            width: x.cols(),
            inner,
        })
    }

    /// Trains on a complete (imputed) dataset.
    pub fn train(&self, spec: &LearnerSpec, d: &Dataset, seed: u64) -> Result<TrainedModel> {
        if d.has_missing() {
            return Err(Error::MissingValues(d.target_id().to_string()));
        }
        let learner = self.get(&spec.name)?;
        if learner.binary_only() && !d.representation().is_binary() {
            return Err(Error::InvalidPairing(format!(
                "{} only runs on binary fingerprints, not {}",
                spec.name,
                d.representation()
            )));
        }
        self.fit_matrix(spec, d.features(), d.activity(), seed)
    }
}

/// Root mean squared error.
pub fn rmse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sse: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((sse / y_true.len() as f64).sqrt())
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[3.0, 1.0, 4.0], &[3.0, 1.0, 4.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(rmse(&[0.0, 2.0], &[0.0, 0.0]).unwrap(), 2f64.sqrt());
        assert!(matches!(rmse(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(rmse(&[], &[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn registry_rejects_unknown_and_bad_pairing() {
        let r = Registry::default();
        assert!(matches!(
            r.validate(&LearnerSpec::new("earth")),
            Err(Error::UnknownLearner(_))
        ));
        let bad = Strategy::named("ksvmfp", Representation::AllMolProp);
        assert!(matches!(r.validate_strategy(&bad), Err(Error::InvalidPairing(_))));
        let ok = Strategy::named("ksvmfp", Representation::FingerprintFcfp4);
        r.validate_strategy(&ok).unwrap();
        assert_eq!(ok.id(), "ksvmfp.fpFCFP4");
    }

    #[test]
    fn unknown_hyperparameter_rejected() {
        let r = Registry::default();
        let spec = LearnerSpec::new("rtree").with("min_splitt", 3.0);
        assert!(matches!(r.validate(&spec), Err(Error::InvalidHyperparameter { .. })));
        let spec = LearnerSpec::new("fnn").with("k", 0.0);
        assert!(r.validate(&spec).is_err());
    }
}
