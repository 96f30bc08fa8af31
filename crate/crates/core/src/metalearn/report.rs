use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metalearn::cv::SelectionReport;
use crate::metalearn::importance::FeatureImportance;
use crate::stats::{wilcoxon_signed_rank, TestResult};

/// Paired comparison of a selector's realized RMSE against the default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefaultComparison {
    pub method: String,
    pub default_strategy: String,
    pub n: usize,
    pub mean_chosen_rmse: f64,
    pub mean_default_rmse: f64,
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// Signed statistic is positive when the default is worse.
    pub wilcoxon: TestResult,
}

pub fn compare_to_default(report: &SelectionReport) -> Result<DefaultComparison> {
    let mut chosen = Vec::new();
    let mut default = Vec::new();
    for s in &report.selections {
        let d = s
            .default_rmse
            .ok_or_else(|| Error::UnknownStrategy(report.default_strategy.clone()))?;
        if let Some(c) = s.chosen_rmse {
            chosen.push(c);
            default.push(d);
        }
    }
    if chosen.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = chosen.len();
    let (mut wins, mut losses, mut ties) = (0, 0, 0);
    for (c, d) in chosen.iter().zip(&default) {
        match c.total_cmp(d) {
            std::cmp::Ordering::Less => wins += 1,
            std::cmp::Ordering::Greater => losses += 1,
            std::cmp::Ordering::Equal => ties += 1,
        }
    }
    Ok(DefaultComparison {
        method: report.method.clone(),
        default_strategy: report.default_strategy.clone(),
        n,
        mean_chosen_rmse: chosen.iter().sum::<f64>() / n as f64,
        mean_default_rmse: default.iter().sum::<f64>() / n as f64,
        wins,
        losses,
        ties,
        wilcoxon: wilcoxon_signed_rank(&default, &chosen)?,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn write(path: &Path, w: csv::Writer<Vec<u8>>) -> Result<()> {
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// `target_id,method,chosen_strategy,chosen_rmse,default_rmse`.
pub fn write_selection_csv(path: &Path, reports: &[SelectionReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["target_id", "method", "chosen_strategy", "chosen_rmse", "default_rmse"])?;
    for r in reports {
        for s in &r.selections {
            w.write_record([
                s.target_id.clone(),
                r.method.clone(),
                s.chosen_strategy.clone(),
                opt(s.chosen_rmse),
                opt(s.default_rmse),
            ])?;
        }
    }
    write(path, w)
}

/// Long form `method,target_id,rmse` with the default strategy as its own
/// method, for plotting both distributions side by side.
pub fn write_distribution_csv(path: &Path, reports: &[SelectionReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "target_id", "rmse"])?;
    if let Some(first) = reports.first() {
        for s in &first.selections {
            if let Some(d) = s.default_rmse {
                w.write_record([format!("default:{}", first.default_strategy), s.target_id.clone(), d.to_string()])?;
            }
        }
    }
    for r in reports {
        for s in &r.selections {
            if let Some(c) = s.chosen_rmse {
                w.write_record([r.method.clone(), s.target_id.clone(), c.to_string()])?;
            }
        }
    }
    write(path, w)
}

/// `method,accuracy,baseline_accuracy,fold,fold_accuracy` style summary:
/// one row per method and fold plus an `all` row.
pub fn write_accuracy_csv(path: &Path, reports: &[SelectionReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "fold", "accuracy", "baseline_accuracy"])?;
    for r in reports {
        w.write_record([r.method.clone(), "all".into(), r.accuracy.to_string(), r.baseline_accuracy.to_string()])?;
        for (f, a) in r.fold_accuracy.iter().enumerate() {
            w.write_record([r.method.clone(), f.to_string(), a.to_string(), String::new()])?;
        }
    }
    write(path, w)
}

/// `method,target_id,spearman` for ranking methods.
pub fn write_spearman_csv(path: &Path, reports: &[SelectionReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "target_id", "spearman"])?;
    for r in reports {
        for s in &r.selections {
            if let Some(rho) = s.spearman {
                w.write_record([r.method.clone(), s.target_id.clone(), rho.to_string()])?;
            }
        }
    }
    write(path, w)
}

/// `metafeature,group,mean_decrease_accuracy`.
pub fn write_importance_csv(path: &Path, importances: &[FeatureImportance]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metafeature", "group", "mean_decrease_accuracy"])?;
    for i in importances {
        w.write_record([i.name.clone(), i.group.token().to_string(), i.mean_decrease_accuracy.to_string()])?;
    }
    write(path, w)
}
