use serde::{Deserialize, Serialize};

use crate::learners::forest::{grow_forest, ForestParams};
use crate::learners::tree::{Multivariate, Tree, TreeParams};
use crate::matrix::Matrix;
use crate::stats::average_ranks;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    #[default]
    Euclidean,
    Cosine,
}

impl Distance {
    pub fn between(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Distance::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Distance::Cosine => {
                let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
                for (x, y) in a.iter().zip(b) {
                    ab += x * y;
                    aa += x * x;
                    bb += y * y;
                }
                if aa == 0.0 || bb == 0.0 {
                    1.0
                } else {
                    1.0 - ab / (aa * bb).sqrt()
                }
            }
        }
    }
}

/// Indices of the `k` pool rows nearest to `query` (ties by index).
pub fn nearest(pool: &Matrix, query: &[f64], k: usize, distance: Distance) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = (0..pool.rows())
        .map(|i| (distance.between(pool.row(i), query), i))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, i)| i).collect()
}

/// Averages the rank vectors of the `k` nearest pool targets and re-ranks
/// the result to `1..m` with averaged ties. `k` is clamped to the pool size.
pub fn knn_rank(pool: &Matrix, pool_ranks: &[Vec<f64>], query: &[f64], k: usize, distance: Distance) -> Vec<f64> {
    assert_eq!(pool.rows(), pool_ranks.len(), "one rank vector per pool row");
    assert!(k >= 1, "k must be at least 1");
    let k = if k > pool.rows() {
        log::warn!("k = {k} exceeds the pool of {} targets; clamping", pool.rows());
        pool.rows()
    } else {
        k
    };
    let m = pool_ranks.first().map_or(0, Vec::len);
    let mut avg = vec![0.0; m];
    for i in nearest(pool, query, k, distance) {
        for (a, r) in avg.iter_mut().zip(&pool_ranks[i]) {
            *a += r;
        }
    }
    average_ranks(&avg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultivariateParams {
    pub n_trees: usize,
    /// `None` means `⌈p/3⌉`.
    pub mtry: Option<usize>,
    pub bootstrap: bool,
    pub min_bucket: usize,
}

impl Default for MultivariateParams {
    fn default() -> Self {
        MultivariateParams {
            n_trees: 500,
            mtry: None,
            bootstrap: true,
            min_bucket: 5,
        }
    }
}

/// Regression forest with vector leaves: each leaf stores the mean RMSE
/// vector of its rows and splits minimise the summed per-output squared
/// error.
#[derive(Debug, Clone)]
pub struct MultivariateForest {
    trees: Vec<Tree<Vec<f64>>>,
    outputs: usize,
}

impl MultivariateForest {
    pub fn fit(x: &Matrix, y: &Matrix, params: MultivariateParams, seed: u64) -> Self {
        assert_eq!(x.rows(), y.rows(), "one response row per sample");
        let p = x.cols();
        let mtry = params
            .mtry
            .unwrap_or_else(|| p.div_ceil(3))
            .clamp(1, p.max(1));
        let min_bucket = params.min_bucket.max(1);
        let forest = ForestParams {
            n_trees: params.n_trees,
            bootstrap: params.bootstrap,
            tree: TreeParams {
                min_split: 2 * min_bucket,
                min_bucket,
                max_depth: usize::MAX,
                mtry: Some(mtry),
            },
        };
        let trees = grow_forest(x, &Multivariate { y }, forest, seed);
        MultivariateForest {
            trees,
            outputs: y.cols(),
        }
    }

    pub fn predict(&self, row: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.outputs];
        for t in &self.trees {
            for (o, v) in out.iter_mut().zip(t.predict(row)) {
                *o += v;
            }
        }
        let n = self.trees.len() as f64;
        out.iter_mut().for_each(|v| *v /= n);
        out
    }

    /// Ascending ranks of the predicted RMSE vector.
    pub fn rank(&self, row: &[f64]) -> Vec<f64> {
        average_ranks(&self.predict(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_neighbour_and_constant_pool() {
        let pool = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![5.0]]);
        let ranks = vec![vec![1.0, 2.0, 3.0], vec![3.0, 1.0, 2.0], vec![2.0, 3.0, 1.0]];
        assert_eq!(knn_rank(&pool, &ranks, &[0.9], 1, Distance::Euclidean), ranks[1]);
        // two nearest of 0.4 are rows 0 and 1: sums (4, 3, 5)
        assert_eq!(knn_rank(&pool, &ranks, &[0.4], 2, Distance::Euclidean), [2.0, 1.0, 3.0]);
        let same = vec![vec![2.0, 1.0, 3.0]; 3];
        assert_eq!(knn_rank(&pool, &same, &[9.0], 99, Distance::Euclidean), same[0]);
    }

    #[test]
    fn multivariate_partition_means() {
        let x = Matrix::from_rows(&(0..10).map(|i| vec![f64::from(i)]).collect::<Vec<_>>());
        let y = Matrix::from_rows(
            &(0..10)
                .map(|i| if i < 5 { vec![1.0, 2.0] } else { vec![3.0, 0.5] })
                .collect::<Vec<_>>(),
        );
        let params = MultivariateParams {
            n_trees: 1,
            bootstrap: false,
            min_bucket: 5,
            mtry: None,
        };
        let f = MultivariateForest::fit(&x, &y, params, 1);
        assert_eq!(f.predict(&[1.0]), [1.0, 2.0]);
        assert_eq!(f.predict(&[8.0]), [3.0, 0.5]);
        assert_eq!(f.rank(&[8.0]), [2.0, 1.0]);
        let flat = Matrix::from_rows(&vec![vec![0.5, 0.5]; 10]);
        let g = MultivariateForest::fit(&x, &flat, MultivariateParams { n_trees: 5, ..params }, 2);
        assert_eq!(g.predict(&[3.0]), [0.5, 0.5]);
        assert_eq!(g.rank(&[3.0]), [1.5, 1.5]);
    }
}
