use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::data::ProteinTarget;

/// Group vocabulary built from training targets only.
///
/// L1 and L2 become one-hot indicators over the observed labels; L3–L6 and
/// the preferred name are encoded by the size of the target's group in the
/// training corpus, 0 for unseen or unpopulated groups.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupingVocab {
    pub l1: Vec<String>,
    pub l2: Vec<String>,
    /// Group sizes for L3..L6.
    pub deep: [BTreeMap<String, usize>; 4],
    pub preferred_name: BTreeMap<String, usize>,
}

const DEEP_LEVELS: [&str; 4] = ["l3", "l4", "l5", "l6"];

impl GroupingVocab {
    pub fn build<'a>(targets: impl IntoIterator<Item = &'a ProteinTarget>) -> Self {
        let mut l1 = BTreeSet::new();
        let mut l2 = BTreeSet::new();
        let mut vocab = GroupingVocab::default();
        for t in targets {
            if !t.class_levels[0].is_empty() {
                l1.insert(t.class_levels[0].clone());
            }
            if !t.class_levels[1].is_empty() {
                l2.insert(t.class_levels[1].clone());
            }
            for (level, map) in vocab.deep.iter_mut().enumerate() {
                let label = &t.class_levels[level + 2];
                if !label.is_empty() {
                    *map.entry(label.clone()).or_default() += 1;
                }
            }
            if !t.preferred_name.is_empty() {
                *vocab
                    .preferred_name
                    .entry(t.preferred_name.clone())
                    .or_default() += 1;
            }
        }
        vocab.l1 = l1.into_iter().collect();
        vocab.l2 = l2.into_iter().collect();
        vocab
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.l1.iter().map(|v| format!("l1={v}")).collect();
        names.extend(self.l2.iter().map(|v| format!("l2={v}")));
        names.extend(DEEP_LEVELS.iter().map(|l| format!("{l}_group_size")));
        names.push("preferred_name_group_size".into());
        names
    }

    pub fn width(&self) -> usize {
        self.l1.len() + self.l2.len() + DEEP_LEVELS.len() + 1
    }
}

pub fn encode_groupings(t: &ProteinTarget, vocab: &GroupingVocab) -> Vec<(String, f64)> {
    let names = vocab.feature_names();
    let mut values = Vec::with_capacity(names.len());
    for v in &vocab.l1 {
        values.push(if *v == t.class_levels[0] { 1.0 } else { 0.0 });
    }
    for v in &vocab.l2 {
        values.push(if *v == t.class_levels[1] { 1.0 } else { 0.0 });
    }
    for (level, map) in vocab.deep.iter().enumerate() {
        values.push(map.get(&t.class_levels[level + 2]).copied().unwrap_or(0) as f64);
    }
    values.push(vocab.preferred_name.get(&t.preferred_name).copied().unwrap_or(0) as f64);
    names.into_iter().zip(values).collect()
}
