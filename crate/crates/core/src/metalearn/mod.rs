//! Meta-level learning: predict which strategy suits a target from its
//! meta-features, evaluated by cross-validation over targets.
//!
//! Methods are addressed by id:
//!
//! | id | method |
//! |----|--------|
//! | `cl.All` | forest classifier over all strategy labels |
//! | `cl.Top{k}` | forest classifier over labels restricted to the top-k aRMSEr set |
//! | `knn.{k}`, `knn.all` | average rank vector of the k nearest targets |
//! | `mvrf` | multivariate forest predicting every strategy's RMSE |
//! | `mvrf.shuffled` | `mvrf` trained on permuted responses (control) |
//! | `oracle`, `default`, `random` | reference selectors |

mod classifier;
mod cv;
mod fold;
mod importance;
mod ranker;
mod report;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::ProteinTarget;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metafeatures::{aligned_layout, MetaFeatureGroup, MetaFeatureVector};
use crate::perfstore::PerformanceMatrix;

pub use classifier::{ClassifierParams, ForestClassifier};
pub use cv::{meta_cross_validate, SelectionReport, TargetSelection};
pub use fold::{prepare_fold, FoldMatrices, Standardizer};
pub use importance::{group_importance, permutation_importance, FeatureImportance};
pub use ranker::{knn_rank, nearest, Distance, MultivariateForest, MultivariateParams};
pub use report::{
    compare_to_default, write_accuracy_csv, write_distribution_csv, write_importance_csv,
    write_selection_csv, write_spearman_csv, DefaultComparison,
};

/// The shipped default strategy.
pub const DEFAULT_STRATEGY: &str = "rforest.fpFCFP4";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetaMethod {
    /// `top_k = None` classifies over all strategies.
    Classifier { top_k: Option<usize> },
    /// `k = None` uses every training target.
    Knn { k: Option<usize> },
    Multivariate { shuffled: bool },
    Oracle,
    Default,
    Random,
}

impl MetaMethod {
    pub fn id(&self) -> String {
        match self {
            MetaMethod::Classifier { top_k: None } => "cl.All".into(),
            MetaMethod::Classifier { top_k: Some(k) } => format!("cl.Top{k}"),
            MetaMethod::Knn { k: None } => "knn.all".into(),
            MetaMethod::Knn { k: Some(k) } => format!("knn.{k}"),
            MetaMethod::Multivariate { shuffled: false } => "mvrf".into(),
            MetaMethod::Multivariate { shuffled: true } => "mvrf.shuffled".into(),
            MetaMethod::Oracle => "oracle".into(),
            MetaMethod::Default => "default".into(),
            MetaMethod::Random => "random".into(),
        }
    }

    /// Produces a predicted ranking (and hence a Spearman score).
    pub fn is_ranker(&self) -> bool {
        matches!(self, MetaMethod::Knn { .. } | MetaMethod::Multivariate { .. })
    }
}

impl fmt::Display for MetaMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for MetaMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown meta method {s:?}"));
        let count = |v: &str| -> Result<usize> {
            match v.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k),
                _ => Err(bad()),
            }
        };
        Ok(match s {
            "cl.All" => MetaMethod::Classifier { top_k: None },
            "knn.all" => MetaMethod::Knn { k: None },
            "mvrf" => MetaMethod::Multivariate { shuffled: false },
            "mvrf.shuffled" => MetaMethod::Multivariate { shuffled: true },
            "oracle" => MetaMethod::Oracle,
            "default" => MetaMethod::Default,
            "random" => MetaMethod::Random,
            _ => {
                if let Some(k) = s.strip_prefix("cl.Top") {
                    MetaMethod::Classifier { top_k: Some(count(k)?) }
                } else if let Some(k) = s.strip_prefix("knn.") {
                    MetaMethod::Knn { k: Some(count(k)?) }
                } else {
                    return Err(bad());
                }
            }
        })
    }
}

impl Serialize for MetaMethod {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.id())
    }
}

impl<'de> Deserialize<'de> for MetaMethod {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetaOptions {
    pub n_folds: usize,
    pub n_trees: usize,
    pub classifier_mtry: Option<usize>,
    pub mvrf_mtry: Option<usize>,
    pub mvrf_min_bucket: usize,
    pub importance_repeats: usize,
    pub default_strategy: String,
    pub use_groupings: bool,
    pub distance: Distance,
}

impl Default for MetaOptions {
    fn default() -> Self {
        MetaOptions {
            n_folds: 10,
            n_trees: 500,
            classifier_mtry: None,
            mvrf_mtry: None,
            mvrf_min_bucket: 5,
            importance_repeats: 10,
            default_strategy: DEFAULT_STRATEGY.into(),
            use_groupings: true,
            distance: Distance::Euclidean,
        }
    }
}

impl MetaOptions {
    pub(crate) fn classifier(&self) -> ClassifierParams {
        ClassifierParams {
            n_trees: self.n_trees,
            mtry: self.classifier_mtry,
            ..ClassifierParams::default()
        }
    }

    pub(crate) fn multivariate(&self) -> MultivariateParams {
        MultivariateParams {
            n_trees: self.n_trees,
            mtry: self.mvrf_mtry,
            min_bucket: self.mvrf_min_bucket,
            ..MultivariateParams::default()
        }
    }
}

/// Targets × meta-features joined with the targets × strategies RMSE matrix.
///
/// Meta-features are stored raw with gap flags; gap filling, grouping
/// encodings and standardization happen per fold from training rows only.
#[derive(Debug, Clone)]
pub struct MetaDataset {
    targets: Vec<String>,
    names: Vec<String>,
    groups: Vec<MetaFeatureGroup>,
    features: Matrix,
    gaps: Vec<bool>,
    proteins: Vec<ProteinTarget>,
    perf: PerformanceMatrix,
}

impl MetaDataset {
    /// `vectors` fix the target order; `proteins` and `perf` must cover
    /// exactly the same targets.
    pub fn new(vectors: &[MetaFeatureVector], proteins: &[ProteinTarget], perf: &PerformanceMatrix) -> Result<Self> {
        let layout = aligned_layout(vectors)?;
        let targets: Vec<String> = vectors.iter().map(|v| v.target_id.clone()).collect();
        let lookup = perf.target_lookup();
        if perf.n_targets() != targets.len() {
            return Err(Error::Inconsistent(format!(
                "{} meta-feature targets but {} performance targets",
                targets.len(),
                perf.n_targets()
            )));
        }
        let rows = targets
            .iter()
            .map(|t| {
                lookup
                    .get(t.as_str())
                    .copied()
                    .ok_or_else(|| Error::Inconsistent(format!("target {t} has no performance row")))
            })
            .collect::<Result<Vec<_>>>()?;
        let by_id: HashMap<&str, &ProteinTarget> =
            proteins.iter().map(|p| (p.target_id.as_str(), p)).collect();
        let proteins = targets
            .iter()
            .map(|t| {
                by_id
                    .get(t.as_str())
                    .map(|p| (*p).clone())
                    .ok_or_else(|| Error::Inconsistent(format!("target {t} has no protein record")))
            })
            .collect::<Result<Vec<_>>>()?;
        let data: Vec<Vec<f64>> = vectors.iter().map(|v| v.values()).collect();
        let gaps = vectors
            .iter()
            .flat_map(|v| v.entries.iter().map(|e| e.gap))
            .collect();
        Ok(MetaDataset {
            targets,
            names: layout.iter().map(|(n, _)| n.clone()).collect(),
            groups: layout.iter().map(|(_, g)| *g).collect(),
            features: Matrix::from_rows(&data),
            gaps,
            proteins,
            perf: perf.select_targets(&rows),
        })
    }

    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names
    }

    pub fn groups(&self) -> &[MetaFeatureGroup] {
        &self.groups
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn is_gap(&self, row: usize, col: usize) -> bool {
        self.gaps[row * self.names.len() + col]
    }

    pub fn proteins(&self) -> &[ProteinTarget] {
        &self.proteins
    }

    /// Performance rows aligned with [`targets`](Self::targets).
    pub fn perf(&self) -> &PerformanceMatrix {
        &self.perf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_ids_round_trip() {
        for id in ["cl.All", "cl.Top3", "knn.50", "knn.all", "mvrf", "mvrf.shuffled", "oracle", "default", "random"] {
            assert_eq!(id.parse::<MetaMethod>().unwrap().id(), id);
        }
        for bad in ["cl.Top0", "knn.", "knn.x", "svm"] {
            assert!(bad.parse::<MetaMethod>().is_err());
        }
    }
}
