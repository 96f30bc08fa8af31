use crate::data::median_of;
use crate::matrix::Matrix;
use crate::metafeatures::{encode_groupings, GroupingVocab, MetaFeatureGroup};
use crate::metalearn::MetaDataset;

/// Per-column centring and scaling learned on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; constant columns keep scale 1.
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows().max(1) as f64;
        let mut mean = vec![0.0; x.cols()];
        let mut scale = vec![0.0; x.cols()];
        for r in 0..x.rows() {
            for (m, v) in mean.iter_mut().zip(x.row(r)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        for r in 0..x.rows() {
            for ((s, m), v) in scale.iter_mut().zip(&mean).zip(x.row(r)) {
                *s += (v - m) * (v - m);
            }
        }
        for (s, m) in scale.iter_mut().zip(&mean) {
            let sd = (*s / n).sqrt();
            *s = if sd > 1e-12 * m.abs().max(1.0) { sd } else { 1.0 };
        }
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for r in 0..out.rows() {
            for ((v, m), s) in out.row_mut(r).iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
        out
    }
}

/// Meta-feature matrices of one fold, standardized with training statistics.
#[derive(Debug, Clone)]
pub struct FoldMatrices {
    pub x_train: Matrix,
    pub x_test: Matrix,
    pub names: Vec<String>,
    pub groups: Vec<MetaFeatureGroup>,
    pub standardizer: Standardizer,
}

/// Builds the fold view of `md`: fills gaps with training medians, appends
/// grouping encodings from a training-only vocabulary and standardizes.
pub fn prepare_fold(md: &MetaDataset, train: &[usize], test: &[usize], use_groupings: bool) -> FoldMatrices {
    let base_train = fill_gaps(md, train, train);
    let base_test = fill_gaps(md, train, test);
    let mut names = md.feature_names().to_vec();
    let mut groups = md.groups().to_vec();
    let (raw_train, raw_test) = if use_groupings {
        let vocab = GroupingVocab::build(train.iter().map(|&i| &md.proteins()[i]));
        let encode = |rows: &[usize]| {
            let data: Vec<Vec<f64>> = rows
                .iter()
                .map(|&i| {
                    encode_groupings(&md.proteins()[i], &vocab)
                        .into_iter()
                        .map(|(_, v)| v)
                        .collect()
                })
                .collect();
            if data.is_empty() {
                Matrix::zeros(0, vocab.width())
            } else {
                Matrix::from_rows(&data)
            }
        };
        names.extend(vocab.feature_names());
        groups.extend(std::iter::repeat(MetaFeatureGroup::Grouping).take(vocab.width()));
        (base_train.hstack(&encode(train)), base_test.hstack(&encode(test)))
    } else {
        (base_train, base_test)
    };
    let standardizer = Standardizer::fit(&raw_train);
    FoldMatrices {
        x_train: standardizer.apply(&raw_train),
        x_test: standardizer.apply(&raw_test),
        names,
        groups,
        standardizer,
    }
}

fn fill_gaps(md: &MetaDataset, train: &[usize], rows: &[usize]) -> Matrix {
    let x = md.features();
    let mut out = x.select_rows(rows);
    for j in 0..x.cols() {
        if !rows.iter().any(|&r| md.is_gap(r, j)) {
            continue;
        }
        let mut observed: Vec<f64> = train
            .iter()
            .filter(|&&r| !md.is_gap(r, j))
            .map(|&r| x.get(r, j))
            .collect();
        let fill = if observed.is_empty() {
            0.0
        } else {
            median_of(&mut observed)
        };
        for (k, &r) in rows.iter().enumerate() {
            if md.is_gap(r, j) {
                out.set(k, j, fill);
            }
        }
    }
    out
}
