use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    // ingestion
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("non-numeric cell {value:?} at row {row}, column {column:?}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("fingerprint cell at row {row}, column {column:?} is {value}, expected 0 or 1")]
    BinaryViolation {
        row: usize,
        column: String,
        value: f64,
    },
    #[error("{representation} expects {expected} features, found {found}")]
    WidthMismatch {
        representation: String,
        expected: usize,
        found: usize,
    },
    #[error("column {0:?} has no observed values")]
    AllMissingColumn(String),
    #[error("dataset {0} still contains missing values")]
    MissingValues(String),
    #[error("invalid protein sequence: {0}")]
    InvalidSequence(String),
    #[error("malformed file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    // learners
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("unknown learner {0:?}")]
    UnknownLearner(String),
    #[error("invalid hyperparameter for {learner}: {reason}")]
    InvalidHyperparameter { learner: String, reason: String },
    #[error("{rows} rows cannot be split into {folds} folds")]
    TooFewRows { rows: usize, folds: usize },
    #[error("invalid strategy pairing: {0}")]
    InvalidPairing(String),
    #[error("strategy list is empty")]
    EmptyStrategyList,
    #[error("duplicate strategy id {0:?}")]
    DuplicateStrategy(String),
    #[error("non-binary value {0} in binary input")]
    NonBinary(f64),
    #[error("model expects {expected} features, got {found}")]
    FeatureWidth { expected: usize, found: usize },

    // metafeatures
    #[error("need at least {min} bins, got {found}")]
    InvalidBins { min: usize, found: usize },
    #[error("total correlation needs at least two columns")]
    SingleColumn,
    #[error("expected {expected} representation, got {found}")]
    WrongRepresentation { expected: String, found: String },
    #[error("pH {0} outside (0, 14)")]
    PhOutOfRange(f64),
    #[error("sequence of length {found} is shorter than {min}")]
    SequenceTooShort { min: usize, found: usize },
    #[error("unknown hydrophobicity scale {0:?}")]
    UnknownScale(String),
    #[error("unknown pKa set {0:?}")]
    UnknownPkaSet(String),

    // perfstore
    #[error("non-positive RMSE {value} for strategy {strategy} on target {target}")]
    NonPositiveRmse {
        strategy: String,
        target: String,
        value: f64,
    },
    #[error("target {0} has no observed performance")]
    AllMissingTarget(String),
    #[error("invalid k = {k} for {m} strategies")]
    InvalidK { k: usize, m: usize },
    #[error("no strategy satisfies the missing-cell policy")]
    NoScorableStrategy,
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),

    // stats
    #[error("constant input has no defined rank correlation")]
    ConstantInput,
    #[error("degenerate dimensions: {0}")]
    DegenerateDimensions(String),
    #[error("no embedded Nemenyi critical value for {m} strategies at alpha {alpha}")]
    TableBound { m: usize, alpha: f64 },

    // metalearn
    #[error("{targets} targets cannot be split into {folds} folds")]
    TooFewTargets { targets: usize, folds: usize },
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    // pipeline
    #[error("configuration error: {0}")]
    Config(String),
    #[error("output directory {0} is not empty (use --force)")]
    OutputNotEmpty(PathBuf),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn hyper(learner: &str, reason: impl Into<String>) -> Self {
        Error::InvalidHyperparameter {
            learner: learner.to_string(),
            reason: reason.into(),
        }
    }

    /// Whether the error stems from user configuration rather than data.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::UnknownLearner(_)
                | Error::InvalidHyperparameter { .. }
                | Error::InvalidPairing(_)
                | Error::EmptyStrategyList
                | Error::DuplicateStrategy(_)
                | Error::UnknownStrategy(_)
                | Error::UnknownScale(_)
                | Error::UnknownPkaSet(_)
                | Error::InfeasibleSpec(_)
                | Error::OutputNotEmpty(_)
                | Error::Json(_)
        )
    }
}
