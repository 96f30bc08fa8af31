use std::collections::HashSet;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::data::{Dataset, TargetRecord};
use crate::error::{Error, Result};
use crate::learners::{rmse, LearnerSpec, Registry, Strategy};
use crate::perfstore::{Cell, CellStatus, PerformanceMatrix, StrategyKey};
use crate::seed::{derive_seed, rng_from};

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub strategy: Strategy,
    pub target_id: String,
    pub fold_rmse: Vec<f64>,
    pub mean_rmse: f64,
}

/// Fold index of every row: rows are shuffled, then dealt round-robin, so
/// fold sizes differ by at most one.
pub fn fold_assignment(n_rows: usize, n_folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n_rows).collect();
    order.shuffle(&mut rng_from(seed));
    let mut fold = vec![0; n_rows];
    for (pos, &row) in order.iter().enumerate() {
        fold[row] = pos % n_folds.max(1);
    }
    fold
}

/// k-fold cross-validated RMSE of one learner on one complete dataset.
pub fn cross_validate(
    registry: &Registry,
    spec: &LearnerSpec,
    d: &Dataset,
    n_folds: usize,
    seed: u64,
) -> Result<CvResult> {
    if n_folds < 2 {
        return Err(Error::DegenerateDimensions(format!(
            "cross-validation needs at least 2 folds, got {n_folds}"
        )));
    }
    let strategy = Strategy::new(spec.clone(), d.representation());
    registry.validate_strategy(&strategy)?;
    if d.has_missing() {
        return Err(Error::MissingValues(d.target_id().to_string()));
    }
    let n = d.n_rows();
    if n < n_folds {
        return Err(Error::TooFewRows {
            rows: n,
            folds: n_folds,
        });
    }
    let folds = fold_assignment(n, n_folds, derive_seed(seed, &["folds"]));
    let fold_rmse = (0..n_folds)
        .into_par_iter()
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| folds[i] == f);
            let x_train = d.features().select_rows(&train);
            let y_train: Vec<f64> = train.iter().map(|&i| d.activity()[i]).collect();
            let model = registry.fit_matrix(
                spec,
                &x_train,
                &y_train,
                derive_seed(seed, &["fold", &f.to_string()]),
            )?;
            let pred = test
                .iter()
                .map(|&i| model.predict(d.features().row(i)))
                .collect::<Result<Vec<f64>>>()?;
            let truth: Vec<f64> = test.iter().map(|&i| d.activity()[i]).collect();
            rmse(&truth, &pred)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean_rmse = fold_rmse.iter().sum::<f64>() / n_folds as f64;
    Ok(CvResult {
        strategy,
        target_id: d.target_id().to_string(),
        fold_rmse,
        mean_rmse,
    })
}

/// Seed for one (strategy, target) cell, independent of evaluation order.
pub(crate) fn cell_seed(root: u64, strategy_id: &str, target_id: &str) -> u64 {
    derive_seed(root, &["cv", strategy_id, target_id])
}

/// Cross-validates one strategy on one target, folding failures into the
/// cell status instead of returning an error.
pub(crate) fn evaluate_cell(
    registry: &Registry,
    record: &TargetRecord,
    strategy: &Strategy,
    n_folds: usize,
    seed: u64,
) -> Cell {
    let Some(d) = record.dataset(strategy.representation) else {
        return Cell::failed(
            CellStatus::MissingRepresentation,
            format!("no {} dataset", strategy.representation),
        );
    };
    let s = cell_seed(seed, &strategy.id(), &record.target_id);
    match cross_validate(registry, &strategy.learner, d, n_folds, s) {
        Ok(cv) => Cell::ok(cv.mean_rmse, cv.fold_rmse),
        Err(e @ Error::TooFewRows { .. }) => {
            log::info!("{} on {}: {e}", strategy.id(), record.target_id);
            Cell::failed(CellStatus::SkippedTooFewRows, e.to_string())
        }
        Err(e) => {
            log::warn!("{} on {} failed: {e}", strategy.id(), record.target_id);
            Cell::failed(CellStatus::Failed, e.to_string())
        }
    }
}

pub(crate) fn validate_strategies(registry: &Registry, strategies: &[Strategy]) -> Result<()> {
    if strategies.is_empty() {
        return Err(Error::EmptyStrategyList);
    }
    let mut seen = HashSet::new();
    for s in strategies {
        registry.validate_strategy(s)?;
        if !seen.insert(s.id()) {
            return Err(Error::DuplicateStrategy(s.id()));
        }
    }
    Ok(())
}

/// Cross-validates every strategy on every target.
pub fn evaluate_all(
    registry: &Registry,
    corpus: &[TargetRecord],
    strategies: &[Strategy],
    n_folds: usize,
    seed: u64,
) -> Result<PerformanceMatrix> {
    validate_strategies(registry, strategies)?;
    let m = strategies.len();
    let cells: Vec<Cell> = (0..corpus.len() * m)
        .into_par_iter()
        .map(|k| evaluate_cell(registry, &corpus[k / m], &strategies[k % m], n_folds, seed))
        .collect();
    let keys = strategies.iter().map(StrategyKey::from).collect();
    let targets = corpus.iter().map(|t| t.target_id.clone()).collect();
    PerformanceMatrix::new(keys, targets, cells)
}
