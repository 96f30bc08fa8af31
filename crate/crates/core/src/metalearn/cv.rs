use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::fold_assignment;
use crate::matrix::Matrix;
use crate::metalearn::classifier::ForestClassifier;
use crate::metalearn::fold::prepare_fold;
use crate::metalearn::ranker::{knn_rank, MultivariateForest};
use crate::metalearn::{MetaDataset, MetaMethod, MetaOptions};
use crate::perfstore::{rank_strategies, tie_break_scores, topk_set, PerformanceMatrix};
use crate::seed::{derive_rng, derive_seed};
use crate::stats::spearman;

/// Outcome for one held-out target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSelection {
    pub target_id: String,
    pub fold: usize,
    pub chosen_strategy: String,
    /// Looked up in the performance matrix; `None` if that cell is missing.
    pub chosen_rmse: Option<f64>,
    pub default_rmse: Option<f64>,
    /// Best strategy within the method's label set.
    pub true_label: Option<String>,
    pub correct: Option<bool>,
    /// Rankers only; a constant predicted ranking scores 0.
    pub spearman: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub method: String,
    pub default_strategy: String,
    pub n_folds: usize,
    pub selections: Vec<TargetSelection>,
    pub mean_realized_rmse: f64,
    /// `None` when the default strategy is not in the matrix.
    pub mean_default_rmse: Option<f64>,
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    pub accuracy: f64,
    /// Accuracy of predicting the training folds' most frequent label.
    pub baseline_accuracy: f64,
    pub mean_spearman: Option<f64>,
    pub fold_accuracy: Vec<f64>,
    pub fold_spearman: Vec<f64>,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Best eligible strategy per target (lowest RMSE, then higher score, then
/// smaller id); `None` when every eligible cell is missing.
fn restricted_labels(pm: &PerformanceMatrix, eligible: &[usize], scores: &[f64]) -> Vec<Option<usize>> {
    (0..pm.n_targets())
        .map(|t| {
            eligible
                .iter()
                .copied()
                .filter_map(|s| pm.rmse(t, s).map(|r| (s, r)))
                .min_by(|a, b| {
                    a.1.total_cmp(&b.1)
                        .then_with(|| scores[b.0].total_cmp(&scores[a.0]))
                        .then_with(|| pm.strategies()[a.0].id.cmp(&pm.strategies()[b.0].id))
                })
                .map(|(s, _)| s)
        })
        .collect()
}

/// Strategy with the lowest predicted rank; ties go to the smaller id.
fn top_of_ranking(pm: &PerformanceMatrix, ranks: &[f64]) -> usize {
    (0..ranks.len())
        .min_by(|&a, &b| {
            ranks[a]
                .total_cmp(&ranks[b])
                .then_with(|| pm.strategies()[a].id.cmp(&pm.strategies()[b].id))
        })
        .expect("at least one strategy")
}

fn majority(labels: &[usize], pm: &PerformanceMatrix) -> Option<usize> {
    let mut counts = vec![0usize; pm.n_strategies()];
    for &l in labels {
        counts[l] += 1;
    }
    (0..counts.len())
        .filter(|&s| counts[s] > 0)
        .max_by(|&a, &b| {
            counts[a]
                .cmp(&counts[b])
                .then_with(|| pm.strategies()[b].id.cmp(&pm.strategies()[a].id))
        })
}

struct FoldOutcome {
    chosen: Vec<usize>,
    ranks: Option<Vec<Vec<f64>>>,
    labels: Vec<Option<usize>>,
    baseline: Option<usize>,
}

/// Cross-validation over targets. Folds depend only on the seed and the
/// number of targets, so every method sees the same partition.
pub fn meta_cross_validate(
    md: &MetaDataset,
    method: MetaMethod,
    opts: &MetaOptions,
    seed: u64,
) -> Result<SelectionReport> {
    let n = md.n_targets();
    if opts.n_folds < 2 || n < opts.n_folds {
        return Err(Error::TooFewTargets {
            targets: n,
            folds: opts.n_folds,
        });
    }
    let perf = md.perf();
    let default_idx = perf.strategy_index(&opts.default_strategy);
    if method == MetaMethod::Default && default_idx.is_none() {
        return Err(Error::UnknownStrategy(opts.default_strategy.clone()));
    }
    let folds = fold_assignment(n, opts.n_folds, derive_seed(seed, &["meta", "folds"]));
    let mut selections: Vec<Option<TargetSelection>> = vec![None; n];
    let mut fold_accuracy = Vec::with_capacity(opts.n_folds);
    let mut fold_spearman = Vec::new();
    let mut baseline_hits = 0usize;
    let mut labelled = 0usize;
    for f in 0..opts.n_folds {
        let train: Vec<usize> = (0..n).filter(|&i| folds[i] != f).collect();
        let test: Vec<usize> = (0..n).filter(|&i| folds[i] == f).collect();
        let out = run_fold(md, method, opts, seed, f, &train, &test)?;
        let test_pm = perf.select_targets(&test);
        let true_ranks = rank_strategies(&test_pm);
        let (mut hits, mut total) = (0usize, 0usize);
        let mut rs = Vec::new();
        for (k, &i) in test.iter().enumerate() {
            let chosen = out.chosen[k];
            let label = out.labels[k];
            let correct = label.map(|l| l == chosen);
            if let Some(l) = label {
                total += 1;
                hits += usize::from(l == chosen);
                baseline_hits += usize::from(out.baseline == Some(l));
                labelled += 1;
            }
            let rho = out.ranks.as_ref().map(|ranks| {
                match spearman(&ranks[k], &true_ranks[k].ranks) {
                    Ok(r) => r,
                    // constant rankings carry no ordering information
                    Err(Error::ConstantInput) => 0.0,
                    Err(e) => panic!("rank vectors are aligned: {e}"),
                }
            });
            if let Some(r) = rho {
                rs.push(r);
            }
            selections[i] = Some(TargetSelection {
                target_id: md.targets()[i].clone(),
                fold: f,
                chosen_strategy: perf.strategies()[chosen].id.clone(),
                chosen_rmse: perf.rmse(i, chosen),
                default_rmse: default_idx.and_then(|d| perf.rmse(i, d)),
                true_label: label.map(|l| perf.strategies()[l].id.clone()),
                correct,
                spearman: rho,
            });
        }
        fold_accuracy.push(if total == 0 { f64::NAN } else { hits as f64 / total as f64 });
        if !rs.is_empty() {
            fold_spearman.push(mean(&rs));
        }
    }
    let selections: Vec<TargetSelection> = selections.into_iter().map(|s| s.expect("every target tested once")).collect();
    Ok(summarize(method, opts, selections, fold_accuracy, fold_spearman, baseline_hits, labelled))
}

fn summarize(
    method: MetaMethod,
    opts: &MetaOptions,
    selections: Vec<TargetSelection>,
    fold_accuracy: Vec<f64>,
    fold_spearman: Vec<f64>,
    baseline_hits: usize,
    labelled: usize,
) -> SelectionReport {
    let realized: Vec<f64> = selections.iter().filter_map(|s| s.chosen_rmse).collect();
    let defaults: Vec<f64> = selections.iter().filter_map(|s| s.default_rmse).collect();
    let (mut wins, mut losses, mut ties) = (0, 0, 0);
    for s in &selections {
        if let (Some(c), Some(d)) = (s.chosen_rmse, s.default_rmse) {
            match c.total_cmp(&d) {
                Ordering::Less => wins += 1,
                Ordering::Greater => losses += 1,
                Ordering::Equal => ties += 1,
            }
        }
    }
    let correct = selections.iter().filter(|s| s.correct == Some(true)).count();
    let rhos: Vec<f64> = selections.iter().filter_map(|s| s.spearman).collect();
    SelectionReport {
        method: method.id(),
        default_strategy: opts.default_strategy.clone(),
        n_folds: opts.n_folds,
        mean_realized_rmse: mean(&realized),
        mean_default_rmse: if defaults.is_empty() { None } else { Some(mean(&defaults)) },
        wins,
        losses,
        ties,
        accuracy: correct as f64 / labelled.max(1) as f64,
        baseline_accuracy: baseline_hits as f64 / labelled.max(1) as f64,
        mean_spearman: if rhos.is_empty() { None } else { Some(mean(&rhos)) },
        fold_accuracy,
        fold_spearman,
        selections,
    }
}

fn run_fold(
    md: &MetaDataset,
    method: MetaMethod,
    opts: &MetaOptions,
    seed: u64,
    f: usize,
    train: &[usize],
    test: &[usize],
) -> Result<FoldOutcome> {
    let perf = md.perf();
    let m = perf.n_strategies();
    let train_pm = perf.select_targets(train);
    let test_pm = perf.select_targets(test);
    let scores = tie_break_scores(&train_pm)?;
    let all: Vec<usize> = (0..m).collect();
    let eligible = match method {
        MetaMethod::Classifier { top_k: Some(k) } => topk_set(&train_pm, &scores, k)?,
        _ => all,
    };
    let train_labels = restricted_labels(&train_pm, &eligible, &scores);
    let test_labels = restricted_labels(&test_pm, &eligible, &scores);
    let observed: Vec<usize> = train_labels.iter().flatten().copied().collect();
    let baseline = majority(&observed, perf);
    let fold_key = f.to_string();
    let needs_features = !matches!(method, MetaMethod::Oracle | MetaMethod::Default | MetaMethod::Random);
    let fm = needs_features.then(|| prepare_fold(md, train, test, opts.use_groupings));
    let mut ranks = None;
    let chosen: Vec<usize> = match method {
        MetaMethod::Classifier { .. } => {
            let fm = fm.as_ref().expect("features prepared");
            // class c is the c-th eligible strategy in id order, so vote
            // ties resolve to the smallest id
            let mut classes = eligible.clone();
            classes.sort_by(|&a, &b| perf.strategies()[a].id.cmp(&perf.strategies()[b].id));
            let class_of = |s: usize| classes.iter().position(|&c| c == s).expect("eligible");
            let rows: Vec<usize> = (0..train.len()).filter(|&k| train_labels[k].is_some()).collect();
            let y: Vec<usize> = rows.iter().map(|&k| class_of(train_labels[k].unwrap())).collect();
            if y.is_empty() {
                return Err(Error::Inconsistent("no labelled training targets".into()));
            }
            let x = fm.x_train.select_rows(&rows);
            // every label restriction shares the fold's forest seed, so
            // cl.All and cl.TopK differ only through their labels
            let clf = ForestClassifier::fit(
                &x,
                &y,
                classes.len(),
                opts.classifier(),
                derive_seed(seed, &["classifier", &fold_key]),
            );
            clf.predict_matrix(&fm.x_test).into_iter().map(|c| classes[c]).collect()
        }
        MetaMethod::Knn { k } => {
            let fm = fm.as_ref().expect("features prepared");
            let pool: Vec<Vec<f64>> = rank_strategies(&train_pm).into_iter().map(|r| r.ranks).collect();
            let k = k.unwrap_or(train.len());
            let predicted: Vec<Vec<f64>> = (0..test.len())
                .map(|r| knn_rank(&fm.x_train, &pool, fm.x_test.row(r), k, opts.distance))
                .collect();
            let chosen = predicted.iter().map(|r| top_of_ranking(perf, r)).collect();
            ranks = Some(predicted);
            chosen
        }
        MetaMethod::Multivariate { shuffled } => {
            let fm = fm.as_ref().expect("features prepared");
            let dense = train_pm.dense().ok_or_else(|| {
                Error::Inconsistent("multivariate ranking needs complete training performance rows".into())
            })?;
            let mut rows: Vec<usize> = (0..dense.len()).collect();
            if shuffled {
                rows.shuffle(&mut derive_rng(seed, &["mvrf", "shuffle", &fold_key]));
            }
            let y = Matrix::from_rows(&rows.iter().map(|&r| dense[r].clone()).collect::<Vec<_>>());
            // the control shares the forest seed so only the labels differ
            let model = MultivariateForest::fit(&fm.x_train, &y, opts.multivariate(), derive_seed(seed, &["mvrf", &fold_key]));
            let predicted: Vec<Vec<f64>> = (0..test.len()).map(|r| model.rank(fm.x_test.row(r))).collect();
            let chosen = predicted.iter().map(|r| top_of_ranking(perf, r)).collect();
            ranks = Some(predicted);
            chosen
        }
        MetaMethod::Oracle => test_labels
            .iter()
            .map(|l| l.ok_or_else(|| Error::AllMissingTarget("held-out target".into())))
            .collect::<Result<_>>()?,
        MetaMethod::Default => {
            let d = perf.strategy_index(&opts.default_strategy).expect("checked by caller");
            vec![d; test.len()]
        }
        MetaMethod::Random => {
            let mut rng = derive_rng(seed, &["random", &fold_key]);
            (0..test.len()).map(|_| rng.gen_range(0..m)).collect()
        }
    };
    Ok(FoldOutcome {
        chosen,
        ranks,
        labels: test_labels,
        baseline,
    })
}
