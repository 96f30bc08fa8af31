use crate::error::{Error, Result};
use crate::stats::special::erfc;
use crate::stats::{average_ranks, tie_groups, TestResult};

/// Largest number of non-zero differences handled by exact enumeration.
pub const EXACT_MAX_N: usize = 12;

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// The statistic is `W+ − W−` over `a − b`, so swapping the inputs negates
/// it. Zero differences are dropped; if none remain, `p = 1`.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::DegenerateDimensions("non-finite paired difference".into()));
    }
    let n = diffs.len();
    if n == 0 {
        return Ok(TestResult::new(0.0, 1.0).with_extra("n", 0).with_extra("method", "none"));
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let statistic = w_plus - w_minus;
    let (p, method) = if n <= EXACT_MAX_N {
        (exact_p(&ranks, w_plus), "exact")
    } else {
        (normal_p(n, &abs, w_plus), "normal")
    };
    Ok(TestResult::new(statistic, p)
        .with_extra("n", n)
        .with_extra("w_plus", w_plus)
        .with_extra("w_minus", w_minus)
        .with_extra("method", method))
}

// Enumerates every sign assignment. Ranks are half-integers, so doubled
// ranks compare exactly as integers.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<u64> = ranks.iter().map(|r| (r * 2.0).round() as u64).collect();
    let observed = (w_plus * 2.0).round() as u64;
    let n = ranks.len();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let s: u64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| doubled[i]).sum();
        if s <= observed {
            le += 1;
        }
        if s >= observed {
            ge += 1;
        }
    }
    let total = (1u64 << n) as f64;
    (2.0 * le.min(ge) as f64 / total).min(1.0)
}

// Normal approximation without continuity correction; the variance drops
// Σ(t³ − t)/48 over tie groups of |d|.
fn normal_p(n: usize, abs: &[f64], w_plus: f64) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let ties: f64 = tie_groups(abs).into_iter().map(|t| (t * t * t - t) as f64).sum();
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = (w_plus - mean) / var.sqrt();
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 3.0];
        let r = wilcoxon_signed_rank(&a, &a).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.statistic, 0.0);
    }

    #[test]
    fn all_positive_exact() {
        let a: Vec<f64> = (1..=12).map(|i| i as f64 + 0.5).collect();
        let b: Vec<f64> = (1..=12).map(|i| i as f64 * 0.5).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.p_value, 2.0 / 4096.0);
        assert_eq!(r.statistic, 78.0);
        let s = wilcoxon_signed_rank(&b, &a).unwrap();
        assert_eq!(s.statistic, -78.0);
        assert_eq!(s.p_value, r.p_value);
    }

    #[test]
    fn normal_branch_is_sane() {
        let a: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin()).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 0.01).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(r.p_value < 1e-6);
        let c: Vec<f64> = a.iter().enumerate().map(|(i, x)| if i % 2 == 0 { x + 0.1 } else { x - 0.1 }).collect();
        let r = wilcoxon_signed_rank(&a, &c).unwrap();
        assert!(r.p_value > 0.9);
    }
}
