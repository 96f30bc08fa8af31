//! Dataset model, ingestion, imputation and the synthetic corpus generator.

mod impute;
mod io;
pub mod synth;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use impute::{impute_median, impute_median_with};
pub(crate) use impute::median as median_of;
pub use io::{
    dataset_file_name, load_corpus, load_dataset, read_fasta, read_groupings, write_dataset,
    write_fasta, write_groupings,
};
pub use synth::{generate_synthetic_corpus, GroundTruth, Regime, SynthCorpus, SynthSpec};

/// The three compound feature encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Representation {
    #[serde(rename = "basicmolprop")]
    BasicMolProp,
    #[serde(rename = "allmolprop")]
    AllMolProp,
    #[serde(rename = "fpFCFP4")]
    FingerprintFcfp4,
}

impl Representation {
    pub const ALL: [Representation; 3] = [
        Representation::BasicMolProp,
        Representation::AllMolProp,
        Representation::FingerprintFcfp4,
    ];

    pub fn expected_width(self) -> usize {
        match self {
            Representation::BasicMolProp => 43,
            Representation::AllMolProp => 1447,
            Representation::FingerprintFcfp4 => 1024,
        }
    }

    /// File and strategy-id token.
    pub fn token(self) -> &'static str {
        match self {
            Representation::BasicMolProp => "basicmolprop",
            Representation::AllMolProp => "allmolprop",
            Representation::FingerprintFcfp4 => "fpFCFP4",
        }
    }

    pub fn is_binary(self) -> bool {
        self == Representation::FingerprintFcfp4
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Representation::ALL
            .into_iter()
            .find(|r| r.token() == s)
            .ok_or_else(|| Error::Config(format!("unknown representation {s:?}")))
    }
}

/// How strictly feature widths are checked against [`Representation::expected_width`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum WidthPolicy {
    #[default]
    Strict,
    AllowOverride,
}

impl WidthPolicy {
    pub fn check(self, representation: Representation, found: usize) -> Result<()> {
        if self == WidthPolicy::Strict && found != representation.expected_width() {
            return Err(Error::WidthMismatch {
                representation: representation.to_string(),
                expected: representation.expected_width(),
                found,
            });
        }
        Ok(())
    }
}

/// One target's compound × feature table plus its activity response.
///
/// Missing cells hold `NaN` in `features` and `true` in the mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    target_id: String,
    representation: Representation,
    feature_names: Vec<String>,
    features: Matrix,
    missing: Vec<bool>,
    activity: Vec<f64>,
}

impl Dataset {
    pub fn new(
        target_id: impl Into<String>,
        representation: Representation,
        feature_names: Vec<String>,
        features: Matrix,
        missing: Vec<bool>,
        activity: Vec<f64>,
    ) -> Result<Self> {
        if activity.is_empty() || features.rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if features.rows() != activity.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature rows but {} activities",
                features.rows(),
                activity.len()
            )));
        }
        if feature_names.len() != features.cols() {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.cols()
            )));
        }
        if missing.len() != features.rows() * features.cols() {
            return Err(Error::InvalidDataset("missing mask shape mismatch".into()));
        }
        if let Some(bad) = activity.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidDataset(format!("non-finite activity {bad}")));
        }
        for r in 0..features.rows() {
            for c in 0..features.cols() {
                let v = features.get(r, c);
                let is_missing = missing[r * features.cols() + c];
                if is_missing {
                    continue;
                }
                if !v.is_finite() {
                    return Err(Error::InvalidDataset(format!(
                        "non-finite value at row {r}, column {c}"
                    )));
                }
                if representation.is_binary() && v != 0.0 && v != 1.0 {
                    return Err(Error::BinaryViolation {
                        row: r,
                        column: feature_names[c].clone(),
                        value: v,
                    });
                }
            }
        }
        Ok(Dataset {
            target_id: target_id.into(),
            representation,
            feature_names,
            features,
            missing,
            activity,
        })
    }

    /// Dataset without missing cells.
    pub fn complete(
        target_id: impl Into<String>,
        representation: Representation,
        feature_names: Vec<String>,
        features: Matrix,
        activity: Vec<f64>,
    ) -> Result<Self> {
        let missing = vec![false; features.rows() * features.cols()];
        Dataset::new(target_id, representation, feature_names, features, missing, activity)
    }

    pub fn target_id(&self) -> &str {
        &self.target_id
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn activity(&self) -> &[f64] {
        &self.activity
    }

    pub fn n_rows(&self) -> usize {
        self.activity.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.missing[row * self.features.cols() + col]
    }

    pub fn missing_mask(&self) -> &[bool] {
        &self.missing
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|&m| m)
    }
}

pub const AMINO_ACIDS: &[u8; 20] = b"ACDEFGHIKLMNPQRSTVWY";

/// Index of a canonical one-letter amino-acid code in [`AMINO_ACIDS`].
#[inline]
pub fn amino_acid_index(code: u8) -> Option<usize> {
    AMINO_ACIDS.iter().position(|&a| a == code)
}

/// A protein drug target: sequence plus curated class hierarchy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProteinTarget {
    pub target_id: String,
    sequence: String,
    /// Levels L1..L6; an empty string marks an unpopulated level.
    pub class_levels: [String; 6],
    pub preferred_name: String,
}

impl ProteinTarget {
    pub fn new(target_id: impl Into<String>, sequence: impl Into<String>) -> Result<Self> {
        let target_id = target_id.into();
        let sequence = sequence.into();
        validate_sequence(&sequence)?;
        Ok(ProteinTarget {
            target_id,
            sequence,
            class_levels: Default::default(),
            preferred_name: String::new(),
        })
    }

    pub fn with_groups(mut self, class_levels: [String; 6], preferred_name: String) -> Self {
        self.class_levels = class_levels;
        self.preferred_name = preferred_name;
        self
    }

    pub fn sequence(&self) -> &str {
        &self.sequence
    }
}

pub fn validate_sequence(seq: &str) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::InvalidSequence("empty sequence".into()));
    }
    if let Some((i, c)) = seq
        .bytes()
        .enumerate()
        .find(|&(_, c)| amino_acid_index(c).is_none())
    {
        return Err(Error::InvalidSequence(format!(
            "character {:?} at position {i} is not a canonical amino acid",
            c as char
        )));
    }
    Ok(())
}

/// Everything known about one target: its datasets and its protein.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetRecord {
    pub target_id: String,
    pub datasets: BTreeMap<Representation, Dataset>,
    pub protein: ProteinTarget,
}

impl TargetRecord {
    pub fn dataset(&self, representation: Representation) -> Option<&Dataset> {
        self.datasets.get(&representation)
    }
}
