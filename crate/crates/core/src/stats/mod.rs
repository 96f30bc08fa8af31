//! Rank statistics used to compare strategies and meta-learners.

mod friedman;
pub mod special;
mod wilcoxon;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use friedman::{
    friedman_test, friedman_test_with, nemenyi_posthoc, nemenyi_q, write_pairwise_csv,
    FriedmanOptions, Nemenyi, NemenyiOptions, PairComparison,
};
pub use special::{chi_square_cdf, chi_square_sf};
pub use wilcoxon::{wilcoxon_signed_rank, EXACT_MAX_N};

/// Outcome of a hypothesis test. `p_value` is always in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    #[serde(default)]
    pub extras: BTreeMap<String, serde_json::Value>,
}

impl TestResult {
    pub fn new(statistic: f64, p_value: f64) -> Self {
        TestResult {
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
            extras: BTreeMap::new(),
        }
    }

    pub fn with_extra(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.extras.insert(key.to_string(), value.into());
        self
    }

    pub fn extra_f64(&self, key: &str) -> Option<f64> {
        self.extras.get(key).and_then(serde_json::Value::as_f64)
    }
}

/// 1-based ranks, ties sharing the mean of the positions they occupy.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j hold equal values; average of (i+1)..=j
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Sizes of the groups of tied values (groups of one included).
pub(crate) fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        groups.push(j - i);
        i = j;
    }
    groups
}

pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::DegenerateDimensions(format!(
            "correlation needs at least 2 points, got {}",
            a.len()
        )));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    pearson(&average_ranks(a), &average_ranks(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[0.5, 1.0, 2.0]), [1.0, 2.0, 3.0]);
        assert_eq!(average_ranks(&[1.0, 1.0, 2.0]), [1.5, 1.5, 3.0]);
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 3.0]), [3.0, 1.0, 3.0, 3.0]);
        assert_eq!(tie_groups(&[3.0, 1.0, 3.0, 3.0]), [1, 3]);
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap(), 0.8);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[6.0, 5.0, 4.0]).unwrap(), -1.0);
        assert!(matches!(spearman(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::ConstantInput)));
        assert!(spearman(&[1.0], &[1.0]).is_err());
        assert!(spearman(&[1.0, 2.0], &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn spearman_symmetric_and_monotone_invariant(
            pairs in prop::collection::vec((0u8..6, -50.0f64..50.0), 3..30)
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            if let Ok(r) = spearman(&a, &b) {
                prop_assert!((-1.0..=1.0).contains(&r));
                prop_assert_eq!(r, spearman(&b, &a).unwrap());
                let ta: Vec<f64> = a.iter().map(|x| (x * 0.3).exp()).collect();
                let tb: Vec<f64> = b.iter().map(|x| x * x * x - 7.0).collect();
                prop_assert!((spearman(&ta, &tb).unwrap() - r).abs() < 1e-12);
            }
        }

        #[test]
        fn rank_sum_is_triangular(v in prop::collection::vec(0u8..5, 1..40)) {
            let v: Vec<f64> = v.into_iter().map(f64::from).collect();
            let n = v.len() as f64;
            let s: f64 = average_ranks(&v).iter().sum();
            prop_assert!((s - n * (n + 1.0) / 2.0).abs() < 1e-9);
        }
    }
}
