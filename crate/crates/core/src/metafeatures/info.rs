//! Information-theoretic meta-features over equal-width discretizations.
//! Entropies are in nats.

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed::derive_rng;

/// Equal-width bins over `[min, max]`; the maximum lands in the top bin and
/// a constant vector maps to bin 0.
pub fn discretize(x: &[f64], n_bins: usize) -> Result<Vec<usize>> {
    if n_bins < 1 {
        return Err(Error::InvalidBins { min: 1, found: n_bins });
    }
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0) || !range.is_finite() {
        return Ok(vec![0; x.len()]);
    }
    Ok(x.iter()
        .map(|&v| (((v - lo) / range * n_bins as f64) as usize).min(n_bins - 1))
        .collect())
}

// Summing over sorted counts makes the value a function of the count
// multiset alone, so relabelled but equivalent tables agree bit for bit.
fn entropy_from_counts(mut counts: Vec<usize>) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    counts.sort_unstable();
    let n = n as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    h.max(0.0)
}

fn tuple_counts<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted = keys.to_vec();
    sorted.sort_unstable();
    let mut counts = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        counts.push(j - i);
        i = j;
    }
    counts
}

/// Shannon entropy of a code vector.
pub fn entropy_codes(codes: &[usize]) -> f64 {
    entropy_from_counts(tuple_counts(codes))
}

/// Entropy of the discretized vector divided by `ln(n_bins)`; in `[0, 1]`.
pub fn entropy_normalized(x: &[f64], n_bins: usize) -> Result<f64> {
    if n_bins < 2 {
        return Err(Error::InvalidBins { min: 2, found: n_bins });
    }
    let codes = discretize(x, n_bins)?;
    Ok((entropy_codes(&codes) / (n_bins as f64).ln()).clamp(0.0, 1.0))
}

/// `H(X) + H(Y) − H(X, Y)`, which equals `H(Y) − H(Y | X)`.
pub fn mutual_information_codes(x: &[usize], y: &[usize]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let joint: Vec<(usize, usize)> = x.iter().copied().zip(y.iter().copied()).collect();
    let hxy = entropy_from_counts(tuple_counts(&joint));
    Ok((entropy_codes(x) + entropy_codes(y) - hxy).max(0.0))
}

pub fn mutual_information(x: &[f64], y: &[f64], n_bins: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    mutual_information_codes(&discretize(x, n_bins)?, &discretize(y, n_bins)?)
}

/// `Σ_j H(X_j) − H(X_1, …, X_k)` over code columns of equal length.
pub fn total_correlation_codes(columns: &[Vec<usize>]) -> Result<f64> {
    if columns.len() < 2 {
        return Err(Error::SingleColumn);
    }
    let n = columns[0].len();
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(Error::LengthMismatch {
            left: c.len(),
            right: n,
        });
    }
    let marginal: f64 = columns.iter().map(|c| entropy_codes(c)).sum();
    let rows: Vec<Vec<usize>> = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    let joint = entropy_from_counts(tuple_counts(&rows));
    Ok((marginal - joint).max(0.0))
}

pub fn total_correlation(features: &Matrix, n_bins: usize) -> Result<f64> {
    let cols: Vec<usize> = (0..features.cols()).collect();
    total_correlation_subset(features, &cols, n_bins)
}

fn total_correlation_subset(features: &Matrix, cols: &[usize], n_bins: usize) -> Result<f64> {
    if cols.len() < 2 {
        return Err(Error::SingleColumn);
    }
    let codes = cols
        .iter()
        .map(|&j| discretize(&features.column(j), n_bins))
        .collect::<Result<Vec<_>>>()?;
    total_correlation_codes(&codes)
}

/// Column sub-sampling for total correlation on wide matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TcSampling {
    pub max_columns: usize,
    pub draws: usize,
}

impl Default for TcSampling {
    fn default() -> Self {
        TcSampling {
            max_columns: 5,
            draws: 10,
        }
    }
}

/// Exact when the matrix has at most `max_columns` columns; otherwise the
/// mean over `draws` seeded random subsets of `max_columns` columns.
pub fn total_correlation_sampled(
    features: &Matrix,
    n_bins: usize,
    sampling: TcSampling,
    seed: u64,
) -> Result<f64> {
    let p = features.cols();
    if p < 2 {
        return Err(Error::SingleColumn);
    }
    if sampling.max_columns < 2 || sampling.draws < 1 {
        return Err(Error::Config(format!(
            "total correlation sampling needs max_columns >= 2 and draws >= 1, got {sampling:?}"
        )));
    }
    if p <= sampling.max_columns {
        return total_correlation(features, n_bins);
    }
    let mut total = 0.0;
    for d in 0..sampling.draws {
        let mut rng = derive_rng(seed, &["tc", &d.to_string()]);
        let mut cols = sample(&mut rng, p, sampling.max_columns).into_vec();
        cols.sort_unstable();
        total += total_correlation_subset(features, &cols, n_bins)?;
    }
    Ok(total / sampling.draws as f64)
}
