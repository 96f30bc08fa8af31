use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::perfstore::{Cell, CellStatus, PerformanceMatrix, RankingVector, StrategyKey};

pub const FOLD_COLUMNS: usize = 10;

fn finish(path: &Path, w: csv::Writer<Vec<u8>>) -> Result<()> {
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Long form: `target_id,learner,representation,mean_rmse,fold_rmse_0..9,status`.
pub fn write_performance_csv(path: &Path, pm: &PerformanceMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "target_id".to_string(),
        "learner".into(),
        "representation".into(),
        "mean_rmse".into(),
    ];
    header.extend((0..FOLD_COLUMNS).map(|i| format!("fold_rmse_{i}")));
    header.push("status".into());
    w.write_record(&header)?;
    for t in 0..pm.n_targets() {
        for (s, key) in pm.strategies().iter().enumerate() {
            let cell = pm.cell(t, s);
            let mut rec = vec![
                pm.targets()[t].clone(),
                key.learner.clone(),
                key.representation.clone(),
                fmt_opt(cell.mean_rmse),
            ];
            rec.extend((0..FOLD_COLUMNS).map(|i| fmt_opt(cell.fold_rmse.get(i).copied())));
            rec.push(cell.status.token().to_string());
            w.write_record(&rec)?;
        }
    }
    finish(path, w)
}

pub fn read_performance_csv(path: &Path) -> Result<PerformanceMatrix> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    let expected = 4 + FOLD_COLUMNS + 1;
    if header.len() != expected || &header[0] != "target_id" || &header[expected - 1] != "status" {
        return Err(Error::MalformedHeader(format!(
            "performance matrix header in {}",
            path.display()
        )));
    }
    let malformed = |reason: String| Error::Malformed {
        path: path.to_path_buf(),
        reason,
    };
    let parse = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse()
                .map(Some)
                .map_err(|_| malformed(format!("bad number {s:?}")))
        }
    };
    let mut strategies: Vec<StrategyKey> = Vec::new();
    let mut targets: Vec<String> = Vec::new();
    let mut s_index: HashMap<String, usize> = HashMap::new();
    let mut t_index: HashMap<String, usize> = HashMap::new();
    let mut entries: HashMap<(usize, usize), Cell> = HashMap::new();
    for record in reader.records() {
        let r = record?;
        let id = format!("{}.{}", &r[1], &r[2]);
        let s = *s_index.entry(id.clone()).or_insert_with(|| {
            strategies.push(StrategyKey {
                id,
                learner: r[1].to_string(),
                representation: r[2].to_string(),
            });
            strategies.len() - 1
        });
        let t = *t_index.entry(r[0].to_string()).or_insert_with(|| {
            targets.push(r[0].to_string());
            targets.len() - 1
        });
        let status = CellStatus::from_token(&r[expected - 1])
            .ok_or_else(|| malformed(format!("unknown status {:?}", &r[expected - 1])))?;
        let mean_rmse = parse(&r[3])?;
        let mut fold_rmse = Vec::new();
        for i in 0..FOLD_COLUMNS {
            if let Some(v) = parse(&r[4 + i])? {
                fold_rmse.push(v);
            }
        }
        if (status == CellStatus::Ok) != mean_rmse.is_some() {
            return Err(malformed(format!("status/value mismatch for {}", &r[0])));
        }
        if entries
            .insert(
                (t, s),
                Cell {
                    mean_rmse,
                    fold_rmse,
                    status,
                    reason: None,
                },
            )
            .is_some()
        {
            return Err(malformed(format!("duplicate cell for {}", &r[0])));
        }
    }
    let mut cells = Vec::with_capacity(targets.len() * strategies.len());
    for t in 0..targets.len() {
        for s in 0..strategies.len() {
            cells.push(
                entries
                    .remove(&(t, s))
                    .unwrap_or_else(|| Cell::failed(CellStatus::Failed, "absent from file")),
            );
        }
    }
    PerformanceMatrix::new(strategies, targets, cells)
}

/// `strategy,armser,rank`, sorted by descending score (ties by id).
pub fn write_armser_csv(path: &Path, scores: &[(String, f64)]) -> Result<()> {
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["strategy", "armser", "rank"])?;
    for (i, (s, v)) in sorted.iter().enumerate() {
        w.write_record([s.clone(), v.to_string(), (i + 1).to_string()])?;
    }
    finish(path, w)
}

/// `target_id,label_strategy,k_setting`.
pub fn write_labels_csv(path: &Path, labels: &BTreeMap<String, String>, k_setting: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["target_id", "label_strategy", "k_setting"])?;
    for (t, s) in labels {
        w.write_record([t.as_str(), s.as_str(), k_setting])?;
    }
    finish(path, w)
}

/// `target_id,strategy,rank,missing`.
pub fn write_ranks_csv(path: &Path, pm: &PerformanceMatrix, ranks: &[RankingVector]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["target_id", "strategy", "rank", "missing"])?;
    for rv in ranks {
        for (s, key) in pm.strategies().iter().enumerate() {
            w.write_record([
                rv.target_id.clone(),
                key.id.clone(),
                rv.ranks[s].to_string(),
                rv.missing[s].to_string(),
            ])?;
        }
    }
    finish(path, w)
}
