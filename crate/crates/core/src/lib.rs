//! Meta-learning algorithm selection for QSAR regression problems.
//!
//! The crate is organised along the selection pipeline:
//!
//! * [`data`]: datasets, proteins, file ingestion, median imputation and a
//!   seeded synthetic corpus generator.
//! * [`learners`]: the base regression learner registry and the k-fold
//!   cross-validation harness.
//! * [`metafeatures`]: information-theoretic dataset descriptors, protein
//!   sequence descriptors and target grouping encodings.
//! * [`perfstore`]: the strategy × target performance matrix with aRMSEr
//!   scoring, rankings and labels.
//! * [`metalearn`]: meta-level classifiers and rankers, meta cross-validation,
//!   permutation importance and comparison against a default strategy.
//! * [`stats`]: Spearman, Friedman, Nemenyi and Wilcoxon signed-rank.
//! * [`pipeline`]: configuration, stage commands and run manifests.

pub mod data;
pub mod error;
pub mod learners;
pub mod matrix;
pub mod metafeatures;
pub mod metalearn;
pub mod perfstore;
pub mod pipeline;
pub mod seed;
pub mod stats;

pub use data::{Dataset, ProteinTarget, Representation};
pub use error::{Error, Result};
pub use learners::{LearnerSpec, Registry, Strategy, TrainedModel};
pub use matrix::Matrix;
pub use metafeatures::{MetaFeatureGroup, MetaFeatureVector};
pub use perfstore::PerformanceMatrix;
pub use stats::TestResult;
