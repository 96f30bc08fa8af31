use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::stats::special::{chi_square_sf, f_sf};
use crate::stats::{average_ranks, tie_groups, TestResult};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FriedmanOptions {
    /// Report the Iman–Davenport F statistic and its p-value instead of χ².
    pub iman_davenport: bool,
}

/// Mean within-row ranks (ascending) and the per-row tie term Σ(t³ − t).
fn row_ranks(perf: &Matrix) -> Result<(Vec<f64>, f64)> {
    let (n, m) = (perf.rows(), perf.cols());
    if n < 2 || m < 2 {
        return Err(Error::DegenerateDimensions(format!(
            "need at least 2 rows and 2 columns, got {n} × {m}"
        )));
    }
    if perf.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateDimensions("non-finite performance value".into()));
    }
    let mut mean = vec![0.0; m];
    let mut ties = 0.0;
    for i in 0..n {
        let row = perf.row(i);
        for (acc, r) in mean.iter_mut().zip(average_ranks(row)) {
            *acc += r;
        }
        ties += tie_groups(row)
            .into_iter()
            .map(|t| (t * t * t - t) as f64)
            .sum::<f64>();
    }
    for v in &mut mean {
        *v /= n as f64;
    }
    Ok((mean, ties))
}

pub fn friedman_test(perf: &Matrix) -> Result<TestResult> {
    friedman_test_with(perf, FriedmanOptions::default())
}

/// Friedman test over an `n targets × m strategies` matrix, lower is better.
///
/// `χ²_F = 12n/(m(m+1)) · [Σ_j R̄_j² − m(m+1)²/4] / C`, where the tie
/// correction is `C = 1 − Σ(t³ − t) / (n(m³ − m))` over all tie groups.
pub fn friedman_test_with(perf: &Matrix, opts: FriedmanOptions) -> Result<TestResult> {
    let (mean_ranks, ties) = row_ranks(perf)?;
    let (n, m) = (perf.rows() as f64, perf.cols() as f64);
    let correction = 1.0 - ties / (n * (m * m * m - m));
    let df = m - 1.0;
    let chi2 = if correction <= 0.0 {
        // every row fully tied
        0.0
    } else {
        let ss: f64 = mean_ranks.iter().map(|r| r * r).sum();
        (12.0 * n / (m * (m + 1.0)) * (ss - m * (m + 1.0) * (m + 1.0) / 4.0) / correction).max(0.0)
    };
    let base = |r: TestResult| {
        r.with_extra("df", df)
            .with_extra("tie_correction", correction)
            .with_extra("mean_ranks", mean_ranks.clone())
            .with_extra("chi_square", chi2)
    };
    if !opts.iman_davenport {
        return Ok(base(TestResult::new(chi2, chi_square_sf(chi2, df))));
    }
    let df2 = df * (n - 1.0);
    let denom = n * df - chi2;
    let f = if denom <= 0.0 {
        f64::INFINITY
    } else {
        (n - 1.0) * chi2 / denom
    };
    Ok(base(TestResult::new(f, f_sf(f, df, df2))).with_extra("df2", df2))
}

/// Two-tailed Nemenyi critical values `q_α` (studentized range / √2),
/// indexed by number of strategies `m = 2..=20`.
const Q_05: [f64; 19] = [
    1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164, 3.219, 3.268, 3.313, 3.354,
    3.391, 3.426, 3.458, 3.489, 3.517, 3.544,
];
const Q_10: [f64; 19] = [
    1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978, 3.030, 3.077, 3.120,
    3.159, 3.196, 3.230, 3.261, 3.291, 3.319,
];

pub fn nemenyi_q(alpha: f64, m: usize) -> Result<f64> {
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &Q_05
    } else if (alpha - 0.10).abs() < 1e-12 {
        &Q_10
    } else {
        return Err(Error::TableBound { m, alpha });
    };
    if !(2..=20).contains(&m) {
        return Err(Error::TableBound { m, alpha });
    }
    Ok(table[m - 2])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NemenyiOptions {
    pub alpha: f64,
    /// Overrides the table lookup; required when `m > 20` or for other α.
    pub q_alpha: Option<f64>,
}

impl Default for NemenyiOptions {
    fn default() -> Self {
        NemenyiOptions {
            alpha: 0.05,
            q_alpha: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairComparison {
    pub a: usize,
    pub b: usize,
    /// `R̄_a − R̄_b`.
    pub rank_diff: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nemenyi {
    pub alpha: f64,
    pub q_alpha: f64,
    pub critical_difference: f64,
    pub mean_ranks: Vec<f64>,
    /// All pairs `a < b`.
    pub pairs: Vec<PairComparison>,
}

impl Nemenyi {
    pub fn is_significant(&self, a: usize, b: usize) -> bool {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.pairs
            .iter()
            .any(|p| p.a == a && p.b == b && p.significant)
    }

    /// Symmetric significance matrix; the diagonal is false.
    pub fn significance_matrix(&self) -> Vec<Vec<bool>> {
        let m = self.mean_ranks.len();
        let mut out = vec![vec![false; m]; m];
        for p in &self.pairs {
            out[p.a][p.b] = p.significant;
            out[p.b][p.a] = p.significant;
        }
        out
    }

    pub fn to_test_result(&self) -> TestResult {
        let max_gap = self
            .pairs
            .iter()
            .map(|p| p.rank_diff.abs())
            .fold(0.0, f64::max);
        TestResult::new(max_gap, self.alpha)
            .with_extra("critical_difference", self.critical_difference)
            .with_extra("q_alpha", self.q_alpha)
            .with_extra("mean_ranks", self.mean_ranks.clone())
            .with_extra(
                "significant",
                serde_json::to_value(self.significance_matrix()).expect("bool matrix serializes"),
            )
    }
}

/// Nemenyi post-hoc: `CD = q_α · sqrt(m(m+1)/(6n))`; a pair differs when
/// its mean-rank gap exceeds `CD`.
pub fn nemenyi_posthoc(perf: &Matrix, opts: NemenyiOptions) -> Result<Nemenyi> {
    let (mean_ranks, _) = row_ranks(perf)?;
    let (n, m) = (perf.rows(), perf.cols());
    let q_alpha = match opts.q_alpha {
        Some(q) if q > 0.0 && q.is_finite() => q,
        Some(q) => {
            return Err(Error::DegenerateDimensions(format!("invalid q_alpha {q}")));
        }
        None => nemenyi_q(opts.alpha, m)?,
    };
    let cd = q_alpha * ((m * (m + 1)) as f64 / (6.0 * n as f64)).sqrt();
    let mut pairs = Vec::with_capacity(m * (m - 1) / 2);
    for a in 0..m {
        for b in a + 1..m {
            let rank_diff = mean_ranks[a] - mean_ranks[b];
            pairs.push(PairComparison {
                a,
                b,
                rank_diff,
                significant: rank_diff.abs() > cd,
            });
        }
    }
    Ok(Nemenyi {
        alpha: opts.alpha,
        q_alpha,
        critical_difference: cd,
        mean_ranks,
        pairs,
    })
}

/// `strategy_a,strategy_b,rank_diff,critical_difference,significant`.
pub fn write_pairwise_csv(path: &Path, names: &[String], result: &Nemenyi) -> Result<()> {
    if names.len() != result.mean_ranks.len() {
        return Err(Error::LengthMismatch {
            left: names.len(),
            right: result.mean_ranks.len(),
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "strategy_a",
        "strategy_b",
        "rank_diff",
        "critical_difference",
        "significant",
    ])?;
    for p in &result.pairs {
        w.write_record([
            names[p.a].clone(),
            names[p.b].clone(),
            p.rank_diff.to_string(),
            result.critical_difference.to_string(),
            p.significant.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
