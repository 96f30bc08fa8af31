use rand::seq::index::sample;

use crate::error::Result;
use crate::learners::params::Hyperparams;
use crate::learners::tree::{grow, Tree, TreeParams, Univariate};
use crate::learners::{mean, Learner, Regressor};
use crate::matrix::Matrix;
use crate::seed::rng_from;

/// Gradient boosting with squared loss (`gbm`): 100 depth-1 trees,
/// shrinkage 0.1, at least 10 rows per terminal node, and a random half of
/// the rows per iteration.
#[derive(Debug, Clone, Copy, Default)]
pub struct GradientBoosting;

const KEYS: &[&str] = &[
    "n_trees",
    "depth",
    "shrinkage",
    "min_obs_node",
    "bag_fraction",
];

struct Parsed {
    n_trees: usize,
    depth: usize,
    shrinkage: f64,
    min_obs_node: usize,
    bag_fraction: f64,
}

fn parse(params: &Hyperparams) -> Result<Parsed> {
    let r = params.reader("gbm", KEYS)?;
    Ok(Parsed {
        n_trees: r.count("n_trees", 100, 1)?,
        depth: r.count("depth", 1, 1)?,
        shrinkage: r.f64_in("shrinkage", 0.1, 1e-6, 1.0)?,
        min_obs_node: r.count("min_obs_node", 10, 1)?,
        bag_fraction: r.f64_in("bag_fraction", 0.5, 1e-6, 1.0)?,
    })
}

struct FittedBoost {
    init: f64,
    shrinkage: f64,
    trees: Vec<Tree<f64>>,
}

impl Regressor for FittedBoost {
    fn predict_row(&self, row: &[f64]) -> f64 {
        self.init
            + self.shrinkage * self.trees.iter().map(|t| *t.predict(row)).sum::<f64>()
    }
}

impl Learner for GradientBoosting {
    fn name(&self) -> &str {
        "gbm"
    }

    fn validate(&self, params: &Hyperparams) -> Result<()> {
        parse(params).map(|_| ())
    }

    fn fit(
        &self,
        params: &Hyperparams,
        x: &Matrix,
        y: &[f64],
        seed: u64,
    ) -> Result<Box<dyn Regressor>> {
        let p = parse(params)?;
        let n = y.len();
        let init = mean(y);
        let mut fitted = vec![init; n];
        let mut residual = vec![0.0; n];
        let tree_params = TreeParams {
            min_split: 2 * p.min_obs_node,
            min_bucket: p.min_obs_node,
            max_depth: p.depth,
            mtry: None,
        };
        let bag = ((p.bag_fraction * n as f64).floor() as usize).clamp(1, n);
        let mut rng = rng_from(seed);
        let mut trees = Vec::with_capacity(p.n_trees);
        for _ in 0..p.n_trees {
            for i in 0..n {
                residual[i] = y[i] - fitted[i];
            }
            let mut rows = if bag < n {
                sample(&mut rng, n, bag).into_vec()
            } else {
                (0..n).collect()
            };
            rows.sort_unstable();
            let tree = grow(x, &Univariate { y: &residual }, rows, tree_params, 0);
            for (i, f) in fitted.iter_mut().enumerate() {
                *f += p.shrinkage * tree.predict(x.row(i));
            }
            trees.push(tree);
        }
        Ok(Box::new(FittedBoost {
            init,
            shrinkage: p.shrinkage,
            trees,
        }))
    }
}
