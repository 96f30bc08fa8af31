use crate::data::{Dataset, Representation};
use crate::error::{Error, Result};
use crate::metafeatures::info::{
    discretize, entropy_normalized, mutual_information_codes, total_correlation_sampled, TcSampling,
};

/// Names emitted by [`dataset_metafeatures`], in order.
pub const DATASET_FEATURES: [&str; 12] = [
    "n_compounds",
    "n_features",
    "multiinfo",
    "mutualinfo",
    "nentropyfeat",
    "mmeanfeat",
    "msdfeat",
    "kurtresp",
    "meanresp",
    "skewresp",
    "nentropyresp",
    "sdresp",
];

/// The subset of [`DATASET_FEATURES`] that depends only on the compounds and
/// their activities, hence is identical across representations.
pub const REPRESENTATION_INVARIANT: [&str; 6] = [
    "n_compounds",
    "kurtresp",
    "meanresp",
    "skewresp",
    "nentropyresp",
    "sdresp",
];

/// Mean, sample standard deviation, moment skewness `m3/m2^1.5` and excess
/// kurtosis `m4/m2² − 3`. Degenerate spread gives zero shape statistics.
pub fn moments(x: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let sd = if x.len() > 1 { (m2 / (n - 1.0)).sqrt() } else { 0.0 };
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    // spread at rounding level of the mean counts as constant
    if m2.sqrt() <= 1e-12 * mean.abs().max(1.0) {
        return (mean, sd, 0.0, 0.0);
    }
    (mean, sd, m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Table-style dataset meta-features; see [`DATASET_FEATURES`].
pub fn dataset_metafeatures(
    d: &Dataset,
    n_bins: usize,
    tc: TcSampling,
    seed: u64,
) -> Result<Vec<(String, f64)>> {
    if d.has_missing() {
        return Err(Error::MissingValues(d.target_id().to_string()));
    }
    let x = d.features();
    let y = d.activity();
    let p = x.cols();
    let y_codes = discretize(y, n_bins)?;
    let mut mi = 0.0;
    let mut ent = 0.0;
    let mut mean_sum = 0.0;
    let mut sd_sum = 0.0;
    for j in 0..p {
        let col = x.column(j);
        mi += mutual_information_codes(&discretize(&col, n_bins)?, &y_codes)?;
        ent += entropy_normalized(&col, n_bins)?;
        let (m, s, _, _) = moments(&col);
        mean_sum += m;
        sd_sum += s;
    }
    let pf = p.max(1) as f64;
    let multiinfo = if p >= 2 {
        total_correlation_sampled(x, n_bins, tc, seed)?
    } else {
        0.0
    };
    let (meanresp, sdresp, skewresp, kurtresp) = moments(y);
    let values = [
        d.n_rows() as f64,
        p as f64,
        multiinfo,
        mi / pf,
        ent / pf,
        mean_sum / pf,
        sd_sum / pf,
        kurtresp,
        meanresp,
        skewresp,
        entropy_normalized(y, n_bins)?,
        sdresp,
    ];
    Ok(DATASET_FEATURES
        .iter()
        .map(|n| n.to_string())
        .zip(values)
        .collect())
}

/// Fraction of compounds with each fingerprint bit set.
pub fn aggregate_fingerprint(d: &Dataset) -> Result<Vec<f64>> {
    if d.representation() != Representation::FingerprintFcfp4 {
        return Err(Error::WrongRepresentation {
            expected: Representation::FingerprintFcfp4.token().into(),
            found: d.representation().token().into(),
        });
    }
    let x = d.features();
    let n = x.rows() as f64;
    let mut sums = vec![0.0; x.cols()];
    for r in 0..x.rows() {
        for (s, v) in sums.iter_mut().zip(x.row(r)) {
            *s += v;
        }
    }
    Ok(sums.into_iter().map(|s| s / n).collect())
}
