use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::perfstore::PerformanceMatrix;
use crate::stats::average_ranks;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmserOptions {
    /// Include the `q = p` term (contributes exactly 1) and divide by `m`;
    /// otherwise sum over `q ≠ p` and divide by `m - 1`.
    pub include_self: bool,
    /// Strategies missing on more than this fraction of targets are not scored.
    pub max_missing_fraction: f64,
}

impl Default for ArmserOptions {
    fn default() -> Self {
        ArmserOptions {
            include_self: true,
            max_missing_fraction: 0.1,
        }
    }
}

/// aRMSEr of every scorable strategy, in matrix order.
pub fn armser(pm: &PerformanceMatrix) -> Result<Vec<(String, f64)>> {
    armser_with(pm, ArmserOptions::default())
}

pub fn armser_with(pm: &PerformanceMatrix, opts: ArmserOptions) -> Result<Vec<(String, f64)>> {
    let aligned = armser_aligned(pm, opts)?;
    Ok(pm
        .strategies()
        .iter()
        .zip(aligned)
        .filter(|(_, v)| v.is_finite())
        .map(|(s, v)| (s.id.clone(), v))
        .collect())
}

/// Scores aligned with the matrix columns; unscored strategies get `-inf`.
///
/// `aRMSEr_p = Σ_q geomean_i(RMSE_q^i / RMSE_p^i) / m`, with the geometric
/// mean over targets where both cells are present, evaluated in log space.
pub(crate) fn armser_aligned(pm: &PerformanceMatrix, opts: ArmserOptions) -> Result<Vec<f64>> {
    let scored: Vec<usize> = (0..pm.n_strategies())
        .filter(|&s| pm.missing_fraction(s) <= opts.max_missing_fraction)
        .collect();
    if scored.is_empty() {
        return Err(Error::NoScorableStrategy);
    }
    let n = pm.n_targets();
    // log RMSE per scored strategy
    let mut logs: Vec<Vec<Option<f64>>> = Vec::with_capacity(scored.len());
    for &s in &scored {
        let mut col = Vec::with_capacity(n);
        for t in 0..n {
            col.push(match pm.rmse(t, s) {
                None => None,
                Some(v) if v.is_nan() || v < 0.0 => {
                    return Err(Error::NonPositiveRmse {
                        strategy: pm.strategies()[s].id.clone(),
                        target: pm.targets()[t].clone(),
                        value: v,
                    })
                }
                Some(v) => Some(v.max(super::RMSE_FLOOR).ln()),
            });
        }
        logs.push(col);
    }
    let m = scored.len();
    let mut out = vec![f64::NEG_INFINITY; pm.n_strategies()];
    for (pi, &p) in scored.iter().enumerate() {
        let mut total = 0.0;
        for qi in 0..m {
            if qi == pi {
                if opts.include_self {
                    total += 1.0;
                }
                continue;
            }
            let (mut sum, mut count) = (0.0, 0usize);
            for t in 0..n {
                if let (Some(lq), Some(lp)) = (logs[qi][t], logs[pi][t]) {
                    sum += lq - lp;
                    count += 1;
                }
            }
            total += if count == 0 {
                1.0
            } else {
                (sum / count as f64).exp()
            };
        }
        let denom = if opts.include_self { m } else { m - 1 };
        out[p] = if denom == 0 { 1.0 } else { total / denom as f64 };
    }
    Ok(out)
}

/// Default-option scores for tie-breaking; `-inf` everywhere when no
/// strategy is scorable.
pub(crate) fn tie_break_scores(pm: &PerformanceMatrix) -> Result<Vec<f64>> {
    match armser_aligned(pm, ArmserOptions::default()) {
        Err(Error::NoScorableStrategy) => Ok(vec![f64::NEG_INFINITY; pm.n_strategies()]),
        other => other,
    }
}

/// Ascending-RMSE ranks of the strategies on one target (1 = best).
#[derive(Debug, Clone, PartialEq)]
pub struct RankingVector {
    pub target_id: String,
    /// Aligned with the matrix strategies; ties share their average rank.
    pub ranks: Vec<f64>,
    /// Cells that were missing and therefore ranked last.
    pub missing: Vec<bool>,
}

pub fn rank_strategies(pm: &PerformanceMatrix) -> Vec<RankingVector> {
    (0..pm.n_targets())
        .map(|t| {
            let values: Vec<Option<f64>> = (0..pm.n_strategies()).map(|s| pm.rmse(t, s)).collect();
            let present: Vec<f64> = values.iter().flatten().copied().collect();
            let present_ranks = average_ranks(&present);
            let n_present = present.len() as f64;
            let n_missing = (values.len() - present.len()) as f64;
            let missing_rank = n_present + (n_missing + 1.0) / 2.0;
            let mut it = present_ranks.into_iter();
            let ranks = values
                .iter()
                .map(|v| match v {
                    Some(_) => it.next().expect("one rank per present value"),
                    None => missing_rank,
                })
                .collect();
            RankingVector {
                target_id: pm.targets()[t].clone(),
                ranks,
                missing: values.iter().map(Option::is_none).collect(),
            }
        })
        .collect()
}

/// Orders candidates by lower RMSE, then higher score, then lexicographic id.
fn better(pm: &PerformanceMatrix, scores: &[f64], t: usize, a: usize, b: usize) -> Ordering {
    let (ra, rb) = (pm.rmse(t, a).unwrap(), pm.rmse(t, b).unwrap());
    ra.total_cmp(&rb)
        .then_with(|| scores[b].total_cmp(&scores[a]))
        .then_with(|| pm.strategies()[a].id.cmp(&pm.strategies()[b].id))
}

/// Per target, the index of the lowest-RMSE strategy among `eligible`;
/// ties go to the higher `scores` entry, then the smaller id.
pub fn best_labels_among(
    pm: &PerformanceMatrix,
    eligible: &[usize],
    scores: &[f64],
) -> Result<Vec<usize>> {
    (0..pm.n_targets())
        .map(|t| {
            eligible
                .iter()
                .copied()
                .filter(|&s| pm.rmse(t, s).is_some())
                .min_by(|&a, &b| better(pm, scores, t, a, b))
                .ok_or_else(|| Error::AllMissingTarget(pm.targets()[t].clone()))
        })
        .collect()
}

fn labels_map(pm: &PerformanceMatrix, labels: &[usize]) -> BTreeMap<String, String> {
    pm.targets()
        .iter()
        .zip(labels)
        .map(|(t, &s)| (t.clone(), pm.strategies()[s].id.clone()))
        .collect()
}

/// Lowest-RMSE strategy per target over all strategies.
pub fn best_strategy_labels(pm: &PerformanceMatrix) -> Result<BTreeMap<String, String>> {
    let scores = tie_break_scores(pm)?;
    let all: Vec<usize> = (0..pm.n_strategies()).collect();
    let labels = best_labels_among(pm, &all, &scores)?;
    Ok(labels_map(pm, &labels))
}

/// The `k` strategies with the highest scores (ties by id).
pub fn topk_set(pm: &PerformanceMatrix, scores: &[f64], k: usize) -> Result<Vec<usize>> {
    let m = pm.n_strategies();
    if k < 1 || k > m {
        return Err(Error::InvalidK { k, m });
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| pm.strategies()[a].id.cmp(&pm.strategies()[b].id))
    });
    order.truncate(k);
    order.sort_unstable();
    Ok(order)
}

/// Labels restricted to the top-k strategies by aRMSEr: each target gets
/// its lowest-RMSE strategy within that set.
pub fn topk_labels(pm: &PerformanceMatrix, k: usize) -> Result<BTreeMap<String, String>> {
    let scores = armser_aligned(pm, ArmserOptions::default())?;
    let set = topk_set(pm, &scores, k)?;
    let labels = best_labels_among(pm, &set, &scores)?;
    Ok(labels_map(pm, &labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(ids: &[&str], rows: &[Vec<f64>]) -> PerformanceMatrix {
        let targets: Vec<String> = (0..rows.len()).map(|i| format!("t{i}")).collect();
        PerformanceMatrix::from_dense(ids, &targets, rows).unwrap()
    }

    #[test]
    fn worked_two_by_two() {
        let m = pm(&["p.x", "q.x"], &[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let s = armser(&m).unwrap();
        assert!((s[0].1 - 1.5).abs() < 1e-15);
        assert!((s[1].1 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn exclusive_variant() {
        let m = pm(&["p.x", "q.x"], &[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let opts = ArmserOptions {
            include_self: false,
            ..Default::default()
        };
        let s = armser_with(&m, opts).unwrap();
        assert!((s[0].1 - 2.0).abs() < 1e-15);
        assert!((s[1].1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn equal_cells_score_one() {
        let m = pm(&["a.x", "b.x", "c.x"], &[vec![0.7; 3], vec![0.7; 3]]);
        for (_, v) in armser(&m).unwrap() {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn zero_rmse_is_clamped() {
        let m = pm(&["a.x", "b.x"], &[vec![0.0, 1.0]]);
        let s = armser(&m).unwrap();
        assert!(s[0].1.is_finite() && s[0].1 > s[1].1);
    }

    #[test]
    fn sparse_strategy_excluded() {
        let targets: Vec<String> = (0..10).map(|i| format!("t{i}")).collect();
        let mut rows: Vec<Vec<Option<f64>>> = vec![vec![Some(1.0), Some(2.0)]; 10];
        rows[0][1] = None;
        rows[1][1] = None;
        let m = PerformanceMatrix::from_optional(&["a.x", "b.x"], &targets, &rows).unwrap();
        let s = armser(&m).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].0, "a.x");
    }

    #[test]
    fn ranks_with_ties_and_missing() {
        let m = pm(&["a.x", "b.x", "c.x"], &[vec![0.5, 1.0, 2.0], vec![1.0, 1.0, 2.0]]);
        let r = rank_strategies(&m);
        assert_eq!(r[0].ranks, [1.0, 2.0, 3.0]);
        assert_eq!(r[1].ranks, [1.5, 1.5, 3.0]);
        let m = PerformanceMatrix::from_optional(
            &["a.x", "b.x", "c.x"],
            &["t"],
            &[vec![None, Some(1.0), None]],
        )
        .unwrap();
        let r = rank_strategies(&m);
        assert_eq!(r[0].ranks, [2.5, 1.0, 2.5]);
        assert_eq!(r[0].missing, [true, false, true]);
    }

    #[test]
    fn tie_break_prefers_higher_armser() {
        // b ties a on t0 but is better on t1, so it has the higher aRMSEr
        let m = pm(&["a.x", "b.x"], &[vec![1.0, 1.0], vec![2.0, 1.0]]);
        let labels = best_strategy_labels(&m).unwrap();
        assert_eq!(labels["t0"], "b.x");
        assert_eq!(labels["t1"], "b.x");
    }

    #[test]
    fn topk_restriction() {
        let m = pm(
            &["a.x", "b.x", "c.x"],
            &[
                vec![1.0, 2.0, 4.0],
                vec![1.0, 2.0, 4.0],
                vec![1.0, 2.0, 4.0],
                vec![3.0, 2.0, 1.0],
            ],
        );
        assert_eq!(topk_labels(&m, 3).unwrap(), best_strategy_labels(&m).unwrap());
        let top1 = topk_labels(&m, 1).unwrap();
        let top = top1["t0"].clone();
        assert!(top1.values().all(|v| *v == top));
        let top2 = topk_labels(&m, 2).unwrap();
        // c is best on t3 but outside the top-2 set {a, b}
        assert_eq!(best_strategy_labels(&m).unwrap()["t3"], "c.x");
        assert_eq!(top2["t3"], "b.x");
        assert!(matches!(topk_labels(&m, 0), Err(Error::InvalidK { .. })));
        assert!(matches!(topk_labels(&m, 4), Err(Error::InvalidK { .. })));
    }

    #[test]
    fn all_missing_target() {
        let m = PerformanceMatrix::from_optional(&["a.x"], &["t0", "t1"], &[vec![Some(1.0)], vec![None]])
            .unwrap();
        assert!(matches!(best_strategy_labels(&m), Err(Error::AllMissingTarget(_))));
    }
}
