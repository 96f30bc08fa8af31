use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::fold_assignment;
use crate::metafeatures::MetaFeatureGroup;
use crate::metalearn::classifier::ForestClassifier;
use crate::metalearn::fold::prepare_fold;
use crate::metalearn::{MetaDataset, MetaOptions};
use crate::perfstore::{best_labels_among, tie_break_scores};
use crate::seed::{derive_rng, derive_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub name: String,
    pub group: MetaFeatureGroup,
    /// Held-out accuracy lost when the column is permuted, averaged over
    /// folds (weighted by test size) and repeats.
    pub mean_decrease_accuracy: f64,
    /// Standard error over the (fold, repeat) estimates.
    pub std_error: f64,
}

#[derive(Default)]
struct Acc {
    group: Option<MetaFeatureGroup>,
    weighted: f64,
    samples: Vec<f64>,
}

/// Mean decrease in accuracy of the all-label classifier, per meta-feature,
/// measured on each CV fold's held-out targets with `importance_repeats`
/// permutations per column. Features missing from a fold (grouping
/// indicators of labels unseen in its training part) count as 0 there.
pub fn permutation_importance(md: &MetaDataset, opts: &MetaOptions, seed: u64) -> Result<Vec<FeatureImportance>> {
    let n = md.n_targets();
    if opts.n_folds < 2 || n < opts.n_folds {
        return Err(Error::TooFewTargets {
            targets: n,
            folds: opts.n_folds,
        });
    }
    let repeats = opts.importance_repeats.max(1);
    let perf = md.perf();
    let folds = fold_assignment(n, opts.n_folds, derive_seed(seed, &["meta", "folds"]));
    let mut order: Vec<String> = Vec::new();
    let mut acc: HashMap<String, Acc> = HashMap::new();
    let mut fold_meta: Vec<(usize, usize)> = Vec::new();
    for f in 0..opts.n_folds {
        let train: Vec<usize> = (0..n).filter(|&i| folds[i] != f).collect();
        let test: Vec<usize> = (0..n).filter(|&i| folds[i] == f).collect();
        let fm = prepare_fold(md, &train, &test, opts.use_groupings);
        let train_pm = perf.select_targets(&train);
        let test_pm = perf.select_targets(&test);
        let scores = tie_break_scores(&train_pm)?;
        let all: Vec<usize> = (0..perf.n_strategies()).collect();
        let mut classes = all.clone();
        classes.sort_by(|&a, &b| perf.strategies()[a].id.cmp(&perf.strategies()[b].id));
        let class_of = |s: usize| classes.iter().position(|&c| c == s).expect("strategy");
        let y_train: Vec<usize> = best_labels_among(&train_pm, &all, &scores)?.into_iter().map(class_of).collect();
        let y_test: Vec<usize> = best_labels_among(&test_pm, &all, &scores)?.into_iter().map(class_of).collect();
        let clf = ForestClassifier::fit(
            &fm.x_train,
            &y_train,
            classes.len(),
            opts.classifier(),
            derive_seed(seed, &["importance", "classifier", &f.to_string()]),
        );
        let cache = clf.vote_cache(&fm.x_test);
        let base = clf.accuracy_with_column(&fm.x_test, &y_test, &cache, 0, &fm.x_test.column(0));
        let drops: Vec<Vec<f64>> = (0..fm.names.len())
            .into_par_iter()
            .map(|j| {
                let original = fm.x_test.column(j);
                (0..repeats)
                    .map(|rep| {
                        let mut col = original.clone();
                        col.shuffle(&mut derive_rng(seed, &["perm", &f.to_string(), &fm.names[j], &rep.to_string()]));
                        base - clf.accuracy_with_column(&fm.x_test, &y_test, &cache, j, &col)
                    })
                    .collect()
            })
            .collect();
        let fold_index = fold_meta.len();
        fold_meta.push((f, test.len()));
        for (j, d) in drops.into_iter().enumerate() {
            let name = &fm.names[j];
            let e = acc.entry(name.clone()).or_insert_with(|| {
                order.push(name.clone());
                Acc::default()
            });
            e.group = Some(fm.groups[j]);
            // pad folds where this feature did not exist
            while e.samples.len() < fold_index * repeats {
                e.samples.push(0.0);
            }
            e.weighted += d.iter().sum::<f64>() * test.len() as f64;
            e.samples.extend(d);
        }
    }
    let total_weight: f64 = fold_meta.iter().map(|(_, w)| *w as f64).sum::<f64>() * repeats as f64;
    let n_samples = fold_meta.len() * repeats;
    Ok(order
        .into_iter()
        .map(|name| {
            let mut e = acc.remove(&name).expect("accumulated");
            e.samples.resize(n_samples, 0.0);
            let m = e.samples.iter().sum::<f64>() / n_samples as f64;
            let var = e.samples.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (n_samples.max(2) - 1) as f64;
            FeatureImportance {
                name,
                group: e.group.expect("set with first sample"),
                mean_decrease_accuracy: e.weighted / total_weight,
                std_error: (var / n_samples as f64).sqrt(),
            }
        })
        .collect())
}

/// Importance distribution of each meta-feature group.
pub fn group_importance(importances: &[FeatureImportance]) -> BTreeMap<MetaFeatureGroup, Vec<f64>> {
    let mut out: BTreeMap<MetaFeatureGroup, Vec<f64>> = BTreeMap::new();
    for i in importances {
        out.entry(i.group).or_default().push(i.mean_decrease_accuracy);
    }
    out
}
