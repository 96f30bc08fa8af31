//! Per-target meta-feature vectors: dataset statistics for each
//! representation, aggregated fingerprints, protein descriptors and target
//! grouping encodings.

mod dataset;
mod grouping;
mod info;
mod protein;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{impute_median_with, Representation, TargetRecord};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

pub use dataset::{
    aggregate_fingerprint, dataset_metafeatures, moments, DATASET_FEATURES, REPRESENTATION_INVARIANT,
};
pub use grouping::{encode_groupings, GroupingVocab};
pub use info::{
    discretize, entropy_codes, entropy_normalized, mutual_information, mutual_information_codes,
    total_correlation, total_correlation_codes, total_correlation_sampled, TcSampling,
};
pub use protein::{
    aliphatic_index, boman_index, diwv, dipeptide_composition, dipeptide_names, hydrophobicity,
    hydrophobicity_scale, instability_index, isoelectric_point, net_charge, protein_descriptors,
    sequence_scalars, HydrophobicityScale, IsoelectricPoint, PkaSet, ProteinOptions, SCALES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetaFeatureGroup {
    InfoTheory,
    AggFingerprint,
    ProteinDescriptor,
    Grouping,
}

impl MetaFeatureGroup {
    pub const ALL: [MetaFeatureGroup; 4] = [
        MetaFeatureGroup::InfoTheory,
        MetaFeatureGroup::AggFingerprint,
        MetaFeatureGroup::ProteinDescriptor,
        MetaFeatureGroup::Grouping,
    ];

    pub fn token(self) -> &'static str {
        match self {
            MetaFeatureGroup::InfoTheory => "InfoTheory",
            MetaFeatureGroup::AggFingerprint => "AggFingerprint",
            MetaFeatureGroup::ProteinDescriptor => "ProteinDescriptor",
            MetaFeatureGroup::Grouping => "Grouping",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaFeatureEntry {
    pub name: String,
    pub value: f64,
    pub group: MetaFeatureGroup,
    /// The value could not be computed (missing representation) and is NaN
    /// until imputed.
    pub gap: bool,
}

/// Ordered meta-features of one target. Names are unique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaFeatureVector {
    pub target_id: String,
    pub entries: Vec<MetaFeatureEntry>,
}

impl MetaFeatureVector {
    pub fn new(target_id: impl Into<String>) -> Self {
        MetaFeatureVector {
            target_id: target_id.into(),
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64, group: MetaFeatureGroup) {
        self.entries.push(MetaFeatureEntry {
            name: name.into(),
            value,
            group,
            gap: false,
        });
    }

    fn push_gap(&mut self, name: impl Into<String>, group: MetaFeatureGroup) {
        self.entries.push(MetaFeatureEntry {
            name: name.into(),
            value: f64::NAN,
            group,
            gap: true,
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn has_gaps(&self) -> bool {
        self.entries.iter().any(|e| e.gap)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetaFeatureOptions {
    pub n_bins: usize,
    pub tc_max_columns: usize,
    pub tc_draws: usize,
    pub protein: ProteinOptions,
}

impl Default for MetaFeatureOptions {
    fn default() -> Self {
        let tc = TcSampling::default();
        MetaFeatureOptions {
            n_bins: 10,
            tc_max_columns: tc.max_columns,
            tc_draws: tc.draws,
            protein: ProteinOptions::default(),
        }
    }
}

impl MetaFeatureOptions {
    fn tc(&self) -> TcSampling {
        TcSampling {
            max_columns: self.tc_max_columns,
            draws: self.tc_draws,
        }
    }
}

/// Fingerprint width of the corpus, taken from the first target that has
/// fingerprints.
pub fn corpus_fingerprint_width(records: &[TargetRecord]) -> usize {
    records
        .iter()
        .find_map(|r| r.dataset(Representation::FingerprintFcfp4))
        .map_or(0, |d| d.n_features())
}

/// Builds one target's vector in the corpus-wide order:
///
/// 1. representation-invariant dataset features (once),
/// 2. per-representation dataset features, prefixed by the representation,
/// 3. `fp_width` aggregated fingerprint bits,
/// 4. protein descriptors,
/// 5. grouping encodings, when a vocabulary is given.
///
/// A missing representation yields gap entries rather than an error.
pub fn assemble_metafeatures(
    record: &TargetRecord,
    opts: &MetaFeatureOptions,
    fp_width: usize,
    vocab: Option<&GroupingVocab>,
    seed: u64,
) -> Result<MetaFeatureVector> {
    use MetaFeatureGroup::*;
    let tid = &record.target_id;
    let mut per_rep = Vec::with_capacity(Representation::ALL.len());
    for rep in Representation::ALL {
        let block = match record.dataset(rep) {
            Some(d) => {
                let d = impute_median_with(d, true)?;
                let s = derive_seed(seed, &["metafeatures", tid, rep.token()]);
                Some(dataset_metafeatures(&d, opts.n_bins, opts.tc(), s)?)
            }
            None => None,
        };
        per_rep.push((rep, block));
    }
    let mut v = MetaFeatureVector::new(tid.clone());
    let shared = per_rep.iter().find_map(|(_, b)| b.as_ref());
    for name in REPRESENTATION_INVARIANT {
        match shared {
            Some(block) => {
                let value = block.iter().find(|(n, _)| n == name).expect("known name").1;
                v.push(name, value, InfoTheory);
            }
            None => v.push_gap(name, InfoTheory),
        }
    }
    for (rep, block) in &per_rep {
        for name in DATASET_FEATURES.iter().filter(|n| !REPRESENTATION_INVARIANT.contains(n)) {
            let full = format!("{}.{name}", rep.token());
            match block {
                Some(b) => v.push(full, b.iter().find(|(n, _)| n == name).unwrap().1, InfoTheory),
                None => v.push_gap(full, InfoTheory),
            }
        }
    }
    match record.dataset(Representation::FingerprintFcfp4) {
        Some(d) => {
            let d = impute_median_with(d, false)?;
            let agg = aggregate_fingerprint(&d)?;
            if agg.len() != fp_width {
                return Err(Error::WidthMismatch {
                    representation: Representation::FingerprintFcfp4.token().into(),
                    expected: fp_width,
                    found: agg.len(),
                });
            }
            for (j, a) in agg.into_iter().enumerate() {
                v.push(format!("fp_{j}"), a, AggFingerprint);
            }
        }
        None => {
            for j in 0..fp_width {
                v.push_gap(format!("fp_{j}"), AggFingerprint);
            }
        }
    }
    for (name, value) in protein_descriptors(record.protein.sequence(), &opts.protein)? {
        v.push(name, value, ProteinDescriptor);
    }
    if let Some(vocab) = vocab {
        for (name, value) in encode_groupings(&record.protein, vocab) {
            v.push(name, value, Grouping);
        }
    }
    Ok(v)
}

/// Column layout shared by `vectors`; errors when any vector deviates.
pub fn aligned_layout(vectors: &[MetaFeatureVector]) -> Result<Vec<(String, MetaFeatureGroup)>> {
    let first = vectors.first().ok_or(Error::EmptyInput)?;
    let layout: Vec<(String, MetaFeatureGroup)> = first
        .entries
        .iter()
        .map(|e| (e.name.clone(), e.group))
        .collect();
    for v in vectors {
        let same = v.entries.len() == layout.len()
            && v
                .entries
                .iter()
                .zip(&layout)
                .all(|(e, (n, g))| e.name == *n && e.group == *g);
        if !same {
            return Err(Error::Inconsistent(format!(
                "meta-feature layout of {} differs from {}",
                v.target_id, first.target_id
            )));
        }
    }
    Ok(layout)
}

/// Replaces gap values by the median of the column's non-gap values
/// (0 when the whole column is a gap). Gap flags are kept.
pub fn impute_gaps(vectors: &mut [MetaFeatureVector]) -> Result<()> {
    let layout = aligned_layout(vectors)?;
    for j in 0..layout.len() {
        if !vectors.iter().any(|v| v.entries[j].gap) {
            continue;
        }
        let mut observed: Vec<f64> = vectors
            .iter()
            .filter(|v| !v.entries[j].gap)
            .map(|v| v.entries[j].value)
            .collect();
        let fill = if observed.is_empty() {
            0.0
        } else {
            crate::data::median_of(&mut observed)
        };
        for v in vectors.iter_mut() {
            if v.entries[j].gap {
                v.entries[j].value = fill;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    columns: Vec<SidecarColumn>,
    gaps: std::collections::BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SidecarColumn {
    name: String,
    group: MetaFeatureGroup,
}

/// Writes a `target_id` + meta-feature CSV and a JSON sidecar mapping each
/// column to its group and listing imputed gaps per target.
pub fn write_metadataset(csv_path: &Path, json_path: &Path, vectors: &[MetaFeatureVector]) -> Result<()> {
    let layout = aligned_layout(vectors)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["target_id".to_string()];
    header.extend(layout.iter().map(|(n, _)| n.clone()));
    w.write_record(&header)?;
    for v in vectors {
        let mut rec = vec![v.target_id.clone()];
        rec.extend(v.entries.iter().map(|e| e.value.to_string()));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(csv_path, e.into_error()))?;
    fs::write(csv_path, bytes).map_err(|e| Error::io(csv_path, e))?;
    let sidecar = Sidecar {
        columns: layout
            .into_iter()
            .map(|(name, group)| SidecarColumn { name, group })
            .collect(),
        gaps: vectors
            .iter()
            .filter(|v| v.has_gaps())
            .map(|v| {
                (
                    v.target_id.clone(),
                    v.entries.iter().filter(|e| e.gap).map(|e| e.name.clone()).collect(),
                )
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&sidecar)?;
    fs::write(json_path, json + "\n").map_err(|e| Error::io(json_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic_corpus, SynthSpec};

    fn small_corpus() -> Vec<TargetRecord> {
        let spec = SynthSpec {
            n_targets: 3,
            ..SynthSpec::default()
        };
        generate_synthetic_corpus(&spec, 5).unwrap().targets
    }

    #[test]
    fn layout_is_shared_and_deduplicated() {
        let records = small_corpus();
        let fp = corpus_fingerprint_width(&records);
        let opts = MetaFeatureOptions::default();
        let vocab = GroupingVocab::build(records.iter().map(|r| &r.protein));
        let vecs: Vec<_> = records
            .iter()
            .map(|r| assemble_metafeatures(r, &opts, fp, Some(&vocab), 9).unwrap())
            .collect();
        aligned_layout(&vecs).unwrap();
        let names = vecs[0].names();
        assert_eq!(names.iter().filter(|n| n.ends_with("n_compounds")).count(), 1);
        let mut uniq = names.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), names.len());
        assert!(vecs.iter().all(|v| v.values().iter().all(|x| x.is_finite())));
        let again = assemble_metafeatures(&records[0], &opts, fp, Some(&vocab), 9).unwrap();
        assert_eq!(again, vecs[0]);
    }

    #[test]
    fn missing_representation_leaves_gaps() {
        let mut records = small_corpus();
        let fp = corpus_fingerprint_width(&records);
        records[1].datasets.remove(&Representation::FingerprintFcfp4);
        let opts = MetaFeatureOptions::default();
        let mut vecs: Vec<_> = records
            .iter()
            .map(|r| assemble_metafeatures(r, &opts, fp, None, 1).unwrap())
            .collect();
        assert!(vecs[1].has_gaps() && !vecs[0].has_gaps());
        impute_gaps(&mut vecs).unwrap();
        assert!(vecs[1].values().iter().all(|x| x.is_finite()));
        let dir = tempfile::tempdir().unwrap();
        let (c, j) = (dir.path().join("m.csv"), dir.path().join("m.json"));
        write_metadataset(&c, &j, &vecs).unwrap();
        let text = fs::read_to_string(&j).unwrap();
        assert!(text.contains("fp_0") && text.contains(&vecs[1].target_id));
    }
}
