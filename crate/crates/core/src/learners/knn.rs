use crate::error::Result;
use crate::learners::params::Hyperparams;
use crate::learners::{Learner, Regressor};
use crate::matrix::Matrix;

/// k-nearest-neighbour regression (`fnn`) with Euclidean distance on raw
/// features. Distance ties go to the lower training row index.
#[derive(Debug, Clone, Copy, Default)]
pub struct NearestNeighbors;

struct FittedKnn {
    x: Matrix,
    y: Vec<f64>,
    k: usize,
}

impl Regressor for FittedKnn {
    fn predict_row(&self, row: &[f64]) -> f64 {
        let mut d: Vec<(f64, usize)> = (0..self.x.rows())
            .map(|i| {
                let dist: f64 = self
                    .x
                    .row(i)
                    .iter()
                    .zip(row)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (dist, i)
            })
            .collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, cmp);
        }
        let mut nearest = d[..k].to_vec();
        nearest.sort_by(cmp);
        nearest.iter().map(|&(_, i)| self.y[i]).sum::<f64>() / k as f64
    }
}

impl Learner for NearestNeighbors {
    fn name(&self) -> &str {
        "fnn"
    }

    fn validate(&self, params: &Hyperparams) -> Result<()> {
        params.reader("fnn", &["k"])?.count("k", 1, 1).map(|_| ())
    }

    fn fit(
        &self,
        params: &Hyperparams,
        x: &Matrix,
        y: &[f64],
        _seed: u64,
    ) -> Result<Box<dyn Regressor>> {
        let k = params.reader("fnn", &["k"])?.count("k", 1, 1)?;
        Ok(Box::new(FittedKnn {
            x: x.clone(),
            y: y.to_vec(),
            k,
        }))
    }
}
