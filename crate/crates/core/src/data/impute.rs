use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Replaces each missing cell by the median of the observed values in its
/// column. Even counts use the mean of the two middle values.
pub fn impute_median(d: &Dataset) -> Result<Dataset> {
    impute_median_with(d, false)
}

/// As [`impute_median`]; with `drop_all_missing` set, columns without any
/// observed value are removed instead of raising [`Error::AllMissingColumn`].
pub fn impute_median_with(d: &Dataset, drop_all_missing: bool) -> Result<Dataset> {
    if !d.has_missing() {
        return Ok(d.clone());
    }
    let rows = d.n_rows();
    let mut keep = Vec::with_capacity(d.n_features());
    let mut fill = Vec::with_capacity(d.n_features());
    for c in 0..d.n_features() {
        let mut observed: Vec<f64> = (0..rows)
            .filter(|&r| !d.is_missing(r, c))
            .map(|r| d.features().get(r, c))
            .collect();
        if observed.is_empty() {
            if drop_all_missing {
                log::warn!(
                    "{}: dropping all-missing column {:?}",
                    d.target_id(),
                    d.feature_names()[c]
                );
                continue;
            }
            return Err(Error::AllMissingColumn(d.feature_names()[c].clone()));
        }
        keep.push(c);
        let mut m = median(&mut observed);
        // a binary column split exactly in half keeps the binary invariant
        if d.representation().is_binary() && m == 0.5 {
            m = 0.0;
        }
        fill.push(m);
    }
    let mut features = Matrix::zeros(rows, keep.len());
    for r in 0..rows {
        for (j, &c) in keep.iter().enumerate() {
            let v = if d.is_missing(r, c) {
                fill[j]
            } else {
                d.features().get(r, c)
            };
            features.set(r, j, v);
        }
    }
    let names = keep.iter().map(|&c| d.feature_names()[c].clone()).collect();
    Dataset::complete(
        d.target_id(),
        d.representation(),
        names,
        features,
        d.activity().to_vec(),
    )
}

/// Sample median; sorts `values` in place. Panics on empty input.
pub(crate) fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Representation;
    use proptest::prelude::*;

    fn column_dataset(col: &[Option<f64>]) -> Dataset {
        let data: Vec<f64> = col.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        let missing = col.iter().map(Option::is_none).collect();
        Dataset::new(
            "t",
            Representation::BasicMolProp,
            vec!["x".into()],
            Matrix::from_vec(col.len(), 1, data),
            missing,
            vec![0.0; col.len()],
        )
        .unwrap()
    }

    #[test]
    fn odd_and_even_medians() {
        let d = impute_median(&column_dataset(&[Some(1.0), None, Some(3.0)])).unwrap();
        assert_eq!(d.features().column(0), [1.0, 2.0, 3.0]);
        let d = impute_median(&column_dataset(&[Some(1.0), Some(2.0), None, Some(100.0)])).unwrap();
        assert_eq!(d.features().column(0), [1.0, 2.0, 2.0, 100.0]);
        assert!(!d.has_missing());
    }

    #[test]
    fn complete_dataset_is_unchanged() {
        let d = column_dataset(&[Some(1.0), Some(5.0)]);
        assert_eq!(impute_median(&d).unwrap(), d);
    }

    #[test]
    fn all_missing_column() {
        let d = Dataset::new(
            "t",
            Representation::BasicMolProp,
            vec!["x".into(), "y".into()],
            Matrix::from_rows(&[[f64::NAN, 1.0], [f64::NAN, 2.0]]),
            vec![true, false, true, false],
            vec![0.0, 1.0],
        )
        .unwrap();
        assert!(matches!(impute_median(&d), Err(Error::AllMissingColumn(c)) if c == "x"));
        let dropped = impute_median_with(&d, true).unwrap();
        assert_eq!(dropped.feature_names(), ["y"]);
    }

    proptest! {
        #[test]
        fn idempotent_and_preserves_observed(
            cells in proptest::collection::vec(proptest::option::weighted(0.8, -100.0f64..100.0), 1..40)
        ) {
            prop_assume!(cells.iter().any(Option::is_some));
            let d = column_dataset(&cells);
            let once = impute_median(&d).unwrap();
            let twice = impute_median(&once).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(once.n_rows(), d.n_rows());
            for (r, v) in cells.iter().enumerate() {
                if let Some(v) = v {
                    prop_assert_eq!(once.features().get(r, 0).to_bits(), v.to_bits());
                }
            }
        }
    }
}
