use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::learners::params::Hyperparams;
use crate::learners::tree::{grow, read_tree_params, SplitTarget, Tree, TreeParams, Univariate};
use crate::learners::{Learner, Regressor};
use crate::matrix::Matrix;
use crate::seed::{derive_seed, rng_from};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

/// Grows `n_trees` trees, each on its own bootstrap sample (or on all rows
/// when bootstrapping is disabled). Tree `i` depends only on `(seed, i)`.
pub(crate) fn grow_forest<T: SplitTarget>(
    x: &Matrix,
    target: &T,
    params: ForestParams,
    seed: u64,
) -> Vec<Tree<T::Leaf>> {
    let n = x.rows();
    (0..params.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from(derive_seed(seed, &["tree", &i.to_string()]));
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow(x, target, rows, params.tree, rng.gen())
        })
        .collect()
}

/// Random forest regression (`rforest`): bagged CART trees with a random
/// feature subset of size ⌈p/3⌉ at each node.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomForest;

const KEYS: &[&str] = &[
    "n_trees",
    "mtry",
    "bootstrap",
    "min_split",
    "min_bucket",
    "max_depth",
];

struct Parsed {
    n_trees: usize,
    mtry: Option<usize>,
    bootstrap: bool,
    tree: TreeParams,
}

fn parse(params: &Hyperparams) -> Result<Parsed> {
    let r = params.reader("rforest", KEYS)?;
    Ok(Parsed {
        n_trees: r.count("n_trees", 500, 1)?,
        mtry: r.optional_count("mtry", 1)?,
        bootstrap: r.bool("bootstrap", true)?,
        tree: read_tree_params(&r, TreeParams::QSAR)?,
    })
}

struct FittedForest(Vec<Tree<f64>>);

impl Regressor for FittedForest {
    fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.0.iter().map(|t| *t.predict(row)).sum();
        sum / self.0.len() as f64
    }
}

impl Learner for RandomForest {
    fn name(&self) -> &str {
        "rforest"
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
        let mtry = p.mtry.unwrap_or_else(|| x.cols().div_ceil(3)).max(1);
        let fp = ForestParams {
            n_trees: p.n_trees,
            bootstrap: p.bootstrap,
            tree: TreeParams {
                mtry: Some(mtry),
                ..p.tree
            },
        };
        Ok(Box::new(FittedForest(grow_forest(
            x,
            &Univariate { y },
            fp,
            seed,
        ))))
    }
}
