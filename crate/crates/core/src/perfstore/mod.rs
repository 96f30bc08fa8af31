//! The strategy × target performance matrix and everything derived from it:
//! aRMSEr scores, per-target rankings, best-strategy and top-k labels.

mod csv_io;
mod scoring;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::Strategy;

pub use csv_io::{
    read_performance_csv, write_armser_csv, write_labels_csv, write_performance_csv,
    write_ranks_csv, FOLD_COLUMNS,
};
pub use scoring::{
    armser, armser_with, best_labels_among, best_strategy_labels, rank_strategies, topk_labels,
    topk_set, ArmserOptions, RankingVector,
};
pub(crate) use scoring::tie_break_scores;

/// Lower bound applied to RMSE values in ratio computations.
pub const RMSE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    SkippedTooFewRows,
    MissingRepresentation,
    Failed,
}

impl CellStatus {
    pub fn token(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::SkippedTooFewRows => "skipped_too_few_rows",
            CellStatus::MissingRepresentation => "missing_representation",
            CellStatus::Failed => "failed",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        [
            CellStatus::Ok,
            CellStatus::SkippedTooFewRows,
            CellStatus::MissingRepresentation,
            CellStatus::Failed,
        ]
        .into_iter()
        .find(|c| c.token() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub mean_rmse: Option<f64>,
    pub fold_rmse: Vec<f64>,
    pub status: CellStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl Cell {
    pub fn ok(mean_rmse: f64, fold_rmse: Vec<f64>) -> Self {
        Cell {
            mean_rmse: Some(mean_rmse),
            fold_rmse,
            status: CellStatus::Ok,
            reason: None,
        }
    }

    pub fn failed(status: CellStatus, reason: impl Into<String>) -> Self {
        Cell {
            mean_rmse: None,
            fold_rmse: Vec::new(),
            status,
            reason: Some(reason.into()),
        }
    }
}

/// Strategy identity as recorded in the matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyKey {
    pub id: String,
    pub learner: String,
    pub representation: String,
}

impl StrategyKey {
    /// Splits `learner.representation` at the first dot.
    pub fn parse(id: &str) -> Self {
        let (learner, representation) = id.split_once('.').unwrap_or((id, ""));
        StrategyKey {
            id: id.to_string(),
            learner: learner.to_string(),
            representation: representation.to_string(),
        }
    }
}

impl From<&Strategy> for StrategyKey {
    fn from(s: &Strategy) -> Self {
        StrategyKey {
            id: s.id(),
            learner: s.learner.name.clone(),
            representation: s.representation.token().to_string(),
        }
    }
}

/// Cross-validated RMSE of `m` strategies on `n` targets, stored target-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceMatrix {
    strategies: Vec<StrategyKey>,
    targets: Vec<String>,
    cells: Vec<Cell>,
}

impl PerformanceMatrix {
    pub fn new(strategies: Vec<StrategyKey>, targets: Vec<String>, cells: Vec<Cell>) -> Result<Self> {
        if cells.len() != strategies.len() * targets.len() {
            return Err(Error::Inconsistent(format!(
                "{} cells for {} targets × {} strategies",
                cells.len(),
                targets.len(),
                strategies.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for s in &strategies {
            if !seen.insert(&s.id) {
                return Err(Error::DuplicateStrategy(s.id.clone()));
            }
        }
        for c in &cells {
            if let Some(v) = c.mean_rmse {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::Inconsistent(format!("invalid RMSE {v}")));
                }
            }
        }
        Ok(PerformanceMatrix {
            strategies,
            targets,
            cells,
        })
    }

    /// Complete matrix from rows of RMSE values (one row per target).
    pub fn from_dense<S: AsRef<str>, T: AsRef<str>>(
        strategy_ids: &[S],
        targets: &[T],
        rmse: &[Vec<f64>],
    ) -> Result<Self> {
        let strategies = strategy_ids
            .iter()
            .map(|s| StrategyKey::parse(s.as_ref()))
            .collect();
        let mut cells = Vec::new();
        for row in rmse {
            if row.len() != strategy_ids.len() {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: strategy_ids.len(),
                });
            }
            cells.extend(row.iter().map(|&v| Cell::ok(v, vec![v])));
        }
        PerformanceMatrix::new(
            strategies,
            targets.iter().map(|t| t.as_ref().to_string()).collect(),
            cells,
        )
    }

    /// As [`from_dense`](Self::from_dense) with `None` marking a missing cell.
    pub fn from_optional<S: AsRef<str>, T: AsRef<str>>(
        strategy_ids: &[S],
        targets: &[T],
        rmse: &[Vec<Option<f64>>],
    ) -> Result<Self> {
        let mut pm = PerformanceMatrix::from_dense(
            strategy_ids,
            targets,
            &rmse
                .iter()
                .map(|r| r.iter().map(|v| v.unwrap_or(1.0)).collect())
                .collect::<Vec<_>>(),
        )?;
        for (t, row) in rmse.iter().enumerate() {
            for (s, v) in row.iter().enumerate() {
                if v.is_none() {
                    pm.cells[t * strategy_ids.len() + s] = Cell::failed(CellStatus::Failed, "missing");
                }
            }
        }
        Ok(pm)
    }

    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn n_strategies(&self) -> usize {
        self.strategies.len()
    }

    pub fn strategies(&self) -> &[StrategyKey] {
        &self.strategies
    }

    pub fn strategy_ids(&self) -> Vec<&str> {
        self.strategies.iter().map(|s| s.id.as_str()).collect()
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn strategy_index(&self, id: &str) -> Option<usize> {
        self.strategies.iter().position(|s| s.id == id)
    }

    pub fn target_index(&self, id: &str) -> Option<usize> {
        self.targets.iter().position(|t| t == id)
    }

    pub fn cell(&self, target: usize, strategy: usize) -> &Cell {
        &self.cells[target * self.strategies.len() + strategy]
    }

    /// Raw RMSE of a present cell.
    pub fn rmse(&self, target: usize, strategy: usize) -> Option<f64> {
        self.cell(target, strategy).mean_rmse
    }

    /// RMSE floored at [`RMSE_FLOOR`] for ratio arithmetic.
    pub fn clamped_rmse(&self, target: usize, strategy: usize) -> Option<f64> {
        self.rmse(target, strategy).map(|v| v.max(RMSE_FLOOR))
    }

    pub fn missing_fraction(&self, strategy: usize) -> f64 {
        if self.targets.is_empty() {
            return 0.0;
        }
        let missing = (0..self.targets.len())
            .filter(|&t| self.rmse(t, strategy).is_none())
            .count();
        missing as f64 / self.targets.len() as f64
    }

    pub fn is_complete_target(&self, target: usize) -> bool {
        (0..self.strategies.len()).all(|s| self.rmse(target, s).is_some())
    }

    pub fn has_failures(&self) -> bool {
        self.cells.iter().any(|c| c.status == CellStatus::Failed)
    }

    pub fn select_targets(&self, idx: &[usize]) -> PerformanceMatrix {
        let mut cells = Vec::with_capacity(idx.len() * self.strategies.len());
        for &t in idx {
            for s in 0..self.strategies.len() {
                cells.push(self.cell(t, s).clone());
            }
        }
        PerformanceMatrix {
            strategies: self.strategies.clone(),
            targets: idx.iter().map(|&t| self.targets[t].clone()).collect(),
            cells,
        }
    }

    pub fn select_strategies(&self, idx: &[usize]) -> PerformanceMatrix {
        let mut cells = Vec::with_capacity(idx.len() * self.targets.len());
        for t in 0..self.targets.len() {
            for &s in idx {
                cells.push(self.cell(t, s).clone());
            }
        }
        PerformanceMatrix {
            strategies: idx.iter().map(|&s| self.strategies[s].clone()).collect(),
            targets: self.targets.clone(),
            cells,
        }
    }

    /// Dense RMSE rows (targets × strategies); `None` if any cell is missing.
    pub fn dense(&self) -> Option<Vec<Vec<f64>>> {
        (0..self.targets.len())
            .map(|t| (0..self.strategies.len()).map(|s| self.rmse(t, s)).collect())
            .collect()
    }

    /// Lookup from target id to row index.
    pub fn target_lookup(&self) -> HashMap<&str, usize> {
        self.targets
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect()
    }
}
