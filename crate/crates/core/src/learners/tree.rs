//! CART trees with pluggable split targets.
//!
//! The same builder grows univariate regression trees (sum of squared
//! errors), multivariate regression trees (summed per-output squared errors)
//! and classification trees (Gini impurity). Candidate splits are scanned in
//! ascending feature index and ascending threshold order; the first split
//! with the strictly largest impurity decrease wins.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::learners::params::Hyperparams;
use crate::learners::{Learner, Regressor};
use crate::matrix::Matrix;
use crate::seed::rng_from;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    /// Nodes with fewer rows are not split.
    pub min_split: usize,
    /// Every leaf keeps at least this many rows.
    pub min_bucket: usize,
    pub max_depth: usize,
    /// Features sampled per node; `None` means all.
    pub mtry: Option<usize>,
}

impl TreeParams {
    pub const QSAR: TreeParams = TreeParams {
        min_split: 20,
        min_bucket: 7,
        max_depth: 30,
        mtry: None,
    };
}

/// Sufficient statistics a split target needs to score candidate splits.
pub(crate) trait SplitTarget: Sync {
    type Acc: Clone;
    type Leaf: Clone + Send + Sync;

    /// Empty accumulator for a node holding `rows`.
    fn empty(&self, rows: &[usize]) -> Self::Acc;
    fn push(&self, acc: &mut Self::Acc, row: usize);
    fn pop(&self, acc: &mut Self::Acc, row: usize);
    /// Node impurity scaled by row count (lower is better).
    fn cost(&self, acc: &Self::Acc, n: usize) -> f64;
    fn leaf(&self, rows: &[usize]) -> Self::Leaf;
    fn is_pure(&self, rows: &[usize]) -> bool;
}

#[derive(Debug, Clone)]
pub(crate) enum Node<L> {
    Leaf {
        value: L,
        n: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        n: usize,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Tree<L> {
    nodes: Vec<Node<L>>,
}

impl<L> Tree<L> {
    pub fn predict(&self, row: &[f64]) -> &L {
        match &self.nodes[self.leaf_index(row)] {
            Node::Leaf { value, .. } => value,
            Node::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }

    /// Index into [`nodes`](Self::nodes) of the leaf reached by `row`.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    /// Row counts of every leaf.
    pub fn leaf_sizes(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { n, .. } => Some(*n),
                Node::Split { .. } => None,
            })
            .collect()
    }

    pub fn n_leaves(&self) -> usize {
        self.leaf_sizes().len()
    }

    /// Row counts of every internal node.
    pub fn split_sizes(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { n, .. } => Some(*n),
                Node::Leaf { .. } => None,
            })
            .collect()
    }

    pub fn nodes(&self) -> &[Node<L>] {
        &self.nodes
    }
}

struct Builder<'a, T: SplitTarget> {
    x: &'a Matrix,
    target: &'a T,
    params: TreeParams,
    rng: ChaCha8Rng,
    nodes: Vec<Node<T::Leaf>>,
    order: Vec<usize>,
}

/// Grows a tree on `rows` (duplicates allowed, e.g. a bootstrap sample).
pub(crate) fn grow<T: SplitTarget>(
    x: &Matrix,
    target: &T,
    rows: Vec<usize>,
    params: TreeParams,
    seed: u64,
) -> Tree<T::Leaf> {
    let mut b = Builder {
        x,
        target,
        params,
        rng: rng_from(seed),
        nodes: Vec::new(),
        order: Vec::new(),
    };
    b.build(rows, 0);
    Tree { nodes: b.nodes }
}

impl<T: SplitTarget> Builder<'_, T> {
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: self.target.leaf(&rows),
            n: rows.len(),
        });
        if depth >= self.params.max_depth
            || rows.len() < self.params.min_split
            || rows.len() < 2 * self.params.min_bucket.max(1)
            || self.target.is_pure(&rows)
        {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&rows) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.x.get(i, feature) <= threshold);
        drop(rows);
        let n = l.len() + r.len();
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
            n,
        };
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let p = self.x.cols();
        match self.params.mtry {
            Some(m) if m < p => {
                let mut f = sample(&mut self.rng, p, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..p).collect(),
        }
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<(usize, f64)> {
        let n = rows.len();
        let min_bucket = self.params.min_bucket.max(1);
        let mut total = self.target.empty(rows);
        for &r in rows {
            self.target.push(&mut total, r);
        }
        let parent = self.target.cost(&total, n);
        if parent <= 0.0 {
            return None;
        }
        let tol = parent * 1e-12;
        let mut best: Option<(usize, f64, f64)> = None;
        let features = self.candidate_features();
        let mut order = std::mem::take(&mut self.order);
        for f in features {
            order.clear();
            order.extend_from_slice(rows);
            let x = self.x;
            order.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)));
            if x.get(order[0], f) == x.get(order[n - 1], f) {
                continue;
            }
            let mut left = self.target.empty(rows);
            let mut right = total.clone();
            for i in 0..n - 1 {
                let row = order[i];
                self.target.push(&mut left, row);
                self.target.pop(&mut right, row);
                let nl = i + 1;
                let nr = n - nl;
                if nl < min_bucket {
                    continue;
                }
                if nr < min_bucket {
                    break;
                }
                let (a, b) = (x.get(row, f), x.get(order[i + 1], f));
                if a == b {
                    continue;
                }
                let gain =
                    parent - self.target.cost(&left, nl) - self.target.cost(&right, nr);
                if gain > tol && best.is_none_or(|(_, _, g)| gain > g) {
                    let mut t = a + (b - a) / 2.0;
                    if t >= b {
                        t = a;
                    }
                    best = Some((f, t, gain));
                }
            }
        }
        self.order = order;
        best.map(|(f, t, _)| (f, t))
    }
}

/// Squared-error target for a single response.
pub(crate) struct Univariate<'a> {
    pub y: &'a [f64],
}

#[derive(Clone)]
pub(crate) struct MomentAcc {
    shift: f64,
    sum: f64,
    sumsq: f64,
}

impl SplitTarget for Univariate<'_> {
    type Acc = MomentAcc;
    type Leaf = f64;

    fn empty(&self, rows: &[usize]) -> MomentAcc {
        // centring on the node mean keeps sumsq - sum^2/n accurate
        let shift = rows.iter().map(|&r| self.y[r]).sum::<f64>() / rows.len() as f64;
        MomentAcc {
            shift,
            sum: 0.0,
            sumsq: 0.0,
        }
    }

    #[inline]
    fn push(&self, acc: &mut MomentAcc, row: usize) {
        let v = self.y[row] - acc.shift;
        acc.sum += v;
        acc.sumsq += v * v;
    }

    #[inline]
    fn pop(&self, acc: &mut MomentAcc, row: usize) {
        let v = self.y[row] - acc.shift;
        acc.sum -= v;
        acc.sumsq -= v * v;
    }

    #[inline]
    fn cost(&self, acc: &MomentAcc, n: usize) -> f64 {
        (acc.sumsq - acc.sum * acc.sum / n as f64).max(0.0)
    }

    fn leaf(&self, rows: &[usize]) -> f64 {
        rows.iter().map(|&r| self.y[r]).sum::<f64>() / rows.len() as f64
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        let first = self.y[rows[0]];
        rows.iter().all(|&r| self.y[r] == first)
    }
}

/// Summed squared error across several responses (one row of `y` per sample).
pub(crate) struct Multivariate<'a> {
    pub y: &'a Matrix,
}

#[derive(Clone)]
pub(crate) struct VecMomentAcc {
    shift: Vec<f64>,
    sum: Vec<f64>,
    sumsq: Vec<f64>,
}

impl SplitTarget for Multivariate<'_> {
    type Acc = VecMomentAcc;
    type Leaf = Vec<f64>;

    fn empty(&self, rows: &[usize]) -> VecMomentAcc {
        let shift = self.leaf(rows);
        let k = shift.len();
        VecMomentAcc {
            shift,
            sum: vec![0.0; k],
            sumsq: vec![0.0; k],
        }
    }

    fn push(&self, acc: &mut VecMomentAcc, row: usize) {
        for (j, &y) in self.y.row(row).iter().enumerate() {
            let v = y - acc.shift[j];
            acc.sum[j] += v;
            acc.sumsq[j] += v * v;
        }
    }

    fn pop(&self, acc: &mut VecMomentAcc, row: usize) {
        for (j, &y) in self.y.row(row).iter().enumerate() {
            let v = y - acc.shift[j];
            acc.sum[j] -= v;
            acc.sumsq[j] -= v * v;
        }
    }

    fn cost(&self, acc: &VecMomentAcc, n: usize) -> f64 {
        let n = n as f64;
        acc.sum
            .iter()
            .zip(&acc.sumsq)
            .map(|(s, q)| (q - s * s / n).max(0.0))
            .sum()
    }

    fn leaf(&self, rows: &[usize]) -> Vec<f64> {
        let mut m = vec![0.0; self.y.cols()];
        for &r in rows {
            for (acc, v) in m.iter_mut().zip(self.y.row(r)) {
                *acc += v;
            }
        }
        let n = rows.len() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        let first = self.y.row(rows[0]);
        rows.iter().all(|&r| self.y.row(r) == first)
    }
}

/// Gini impurity over class indices `0..n_classes`.
pub(crate) struct Classes<'a> {
    pub labels: &'a [usize],
    pub n_classes: usize,
}

impl SplitTarget for Classes<'_> {
    type Acc = Vec<f64>;
    /// Class counts.
    type Leaf = Vec<f64>;

    fn empty(&self, _rows: &[usize]) -> Vec<f64> {
        vec![0.0; self.n_classes]
    }

    #[inline]
    fn push(&self, acc: &mut Vec<f64>, row: usize) {
        acc[self.labels[row]] += 1.0;
    }

    #[inline]
    fn pop(&self, acc: &mut Vec<f64>, row: usize) {
        acc[self.labels[row]] -= 1.0;
    }

    fn cost(&self, acc: &Vec<f64>, n: usize) -> f64 {
        let n = n as f64;
        n - acc.iter().map(|c| c * c).sum::<f64>() / n
    }

    fn leaf(&self, rows: &[usize]) -> Vec<f64> {
        let mut counts = vec![0.0; self.n_classes];
        for &r in rows {
            counts[self.labels[r]] += 1.0;
        }
        counts
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        let first = self.labels[rows[0]];
        rows.iter().all(|&r| self.labels[r] == first)
    }
}

pub(crate) fn read_tree_params(
    r: &crate::learners::params::Reader<'_>,
    defaults: TreeParams,
) -> Result<TreeParams> {
    let min_split = r.count("min_split", defaults.min_split, 1)?;
    let min_bucket = r.count("min_bucket", defaults.min_bucket, 1)?;
    let max_depth = r.count("max_depth", defaults.max_depth, 0)?;
    Ok(TreeParams {
        min_split,
        min_bucket,
        max_depth,
        mtry: defaults.mtry,
    })
}

/// Single CART regression tree (`rtree`).
#[derive(Debug, Clone, Copy, Default)]
pub struct RegressionTree;

const RTREE_KEYS: &[&str] = &["min_split", "min_bucket", "max_depth"];

/// A fitted regression tree with its structure exposed for inspection.
#[derive(Debug, Clone)]
pub struct FittedTree(Tree<f64>);

impl FittedTree {
    /// Grows a single CART tree on all rows of `x`.
    pub fn fit(x: &Matrix, y: &[f64], params: TreeParams, seed: u64) -> Self {
        assert_eq!(x.rows(), y.len(), "one response per row");
        FittedTree(grow(x, &Univariate { y }, (0..y.len()).collect(), params, seed))
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        *self.0.predict(row)
    }

    pub fn leaf_sizes(&self) -> Vec<usize> {
        self.0.leaf_sizes()
    }

    pub fn split_sizes(&self) -> Vec<usize> {
        self.0.split_sizes()
    }

    pub fn n_leaves(&self) -> usize {
        self.0.n_leaves()
    }
}

impl Regressor for FittedTree {
    fn predict_row(&self, row: &[f64]) -> f64 {
        *self.0.predict(row)
    }
}

impl RegressionTree {
    pub(crate) fn params(params: &Hyperparams) -> Result<TreeParams> {
        let r = params.reader("rtree", RTREE_KEYS)?;
        read_tree_params(&r, TreeParams::QSAR)
    }
}

impl Learner for RegressionTree {
    fn name(&self) -> &str {
        "rtree"
    }

    fn validate(&self, params: &Hyperparams) -> Result<()> {
        RegressionTree::params(params).map(|_| ())
    }

    fn fit(
        &self,
        params: &Hyperparams,
        x: &Matrix,
        y: &[f64],
        _seed: u64,
    ) -> Result<Box<dyn Regressor>> {
        let tp = RegressionTree::params(params)?;
        let tree = grow(x, &Univariate { y }, (0..y.len()).collect(), tp, 0);
        Ok(Box::new(FittedTree(tree)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_split_blocks_small_nodes() {
        let x = Matrix::from_vec(10, 1, (0..10).map(f64::from).collect());
        let y: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
        let tree = grow(&x, &Univariate { y: &y }, (0..10).collect(), TreeParams::QSAR, 0);
        assert_eq!(tree.n_leaves(), 1);
        assert_eq!(*tree.predict(&[3.0]), y.iter().sum::<f64>() / 10.0);
    }

    #[test]
    fn splits_step_function() {
        let x = Matrix::from_vec(40, 1, (0..40).map(f64::from).collect());
        let y: Vec<f64> = (0..40).map(|i| if i < 20 { 1.0 } else { 5.0 }).collect();
        let tree = grow(&x, &Univariate { y: &y }, (0..40).collect(), TreeParams::QSAR, 0);
        assert_eq!(tree.n_leaves(), 2);
        assert_eq!(*tree.predict(&[3.0]), 1.0);
        assert_eq!(*tree.predict(&[30.0]), 5.0);
        assert_eq!(*tree.predict(&[19.4]), 1.0);
    }

    #[test]
    fn first_feature_wins_ties() {
        // two identical columns: the split must use feature 0
        let rows: Vec<[f64; 2]> = (0..30).map(|i| [i as f64, i as f64]).collect();
        let x = Matrix::from_rows(&rows);
        let y: Vec<f64> = (0..30).map(|i| if i < 15 { 0.0 } else { 1.0 }).collect();
        let tree = grow(&x, &Univariate { y: &y }, (0..30).collect(), TreeParams::QSAR, 0);
        match &tree.nodes()[0] {
            Node::Split { feature, .. } => assert_eq!(*feature, 0),
            Node::Leaf { .. } => panic!("expected a split"),
        }
    }

    #[test]
    fn gini_separates_classes() {
        let x = Matrix::from_vec(6, 1, vec![0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        let labels = [0, 0, 0, 1, 1, 1];
        let params = TreeParams {
            min_split: 2,
            min_bucket: 1,
            max_depth: 30,
            mtry: None,
        };
        let tree = grow(
            &x,
            &Classes {
                labels: &labels,
                n_classes: 2,
            },
            (0..6).collect(),
            params,
            0,
        );
        assert_eq!(tree.predict(&[1.5]), &vec![3.0, 0.0]);
        assert_eq!(tree.predict(&[11.0]), &vec![0.0, 3.0]);
    }
}
