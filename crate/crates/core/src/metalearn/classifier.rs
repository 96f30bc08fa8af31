use crate::learners::forest::{grow_forest, ForestParams};
use crate::learners::tree::{Classes, Node, Tree, TreeParams};
use crate::matrix::Matrix;

/// Forest settings for the meta-level classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierParams {
    pub n_trees: usize,
    /// Features tried per node; `None` means `⌊√p⌋`.
    pub mtry: Option<usize>,
    pub bootstrap: bool,
    pub min_bucket: usize,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            n_trees: 500,
            mtry: None,
            bootstrap: true,
            min_bucket: 1,
        }
    }
}

/// Random forest over class indices `0..n_classes`, fully grown Gini trees
/// and majority vote. Vote ties go to the lowest class index.
#[derive(Debug, Clone)]
pub struct ForestClassifier {
    trees: Vec<Tree<Vec<f64>>>,
    /// Per tree, the winning class of every node (only leaves are read).
    leaf_class: Vec<Vec<usize>>,
    /// Per tree, features used by its splits.
    used: Vec<Vec<bool>>,
    n_classes: usize,
    constant: Option<usize>,
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

impl ForestClassifier {
    pub fn fit(x: &Matrix, labels: &[usize], n_classes: usize, params: ClassifierParams, seed: u64) -> Self {
        assert_eq!(x.rows(), labels.len(), "one label per row");
        assert!(labels.iter().all(|&l| l < n_classes), "label out of range");
        let first = labels.first().copied().unwrap_or(0);
        if labels.iter().all(|&l| l == first) {
            log::warn!("meta classifier trained on a single class; predicting it constantly");
            return ForestClassifier {
                trees: Vec::new(),
                leaf_class: Vec::new(),
                used: Vec::new(),
                n_classes,
                constant: Some(first),
            };
        }
        let p = x.cols();
        let mtry = params
            .mtry
            .unwrap_or_else(|| ((p as f64).sqrt().floor() as usize).max(1))
            .clamp(1, p.max(1));
        let forest = ForestParams {
            n_trees: params.n_trees,
            bootstrap: params.bootstrap,
            tree: TreeParams {
                min_split: 2,
                min_bucket: params.min_bucket.max(1),
                max_depth: usize::MAX,
                mtry: Some(mtry),
            },
        };
        let target = Classes { labels, n_classes };
        let trees = grow_forest(x, &target, forest, seed);
        let leaf_class = trees
            .iter()
            .map(|t| {
                t.nodes()
                    .iter()
                    .map(|n| match n {
                        Node::Leaf { value, .. } => argmax_lowest(value),
                        Node::Split { .. } => usize::MAX,
                    })
                    .collect()
            })
            .collect();
        let used = trees
            .iter()
            .map(|t| {
                let mut u = vec![false; p];
                for n in t.nodes() {
                    if let Node::Split { feature, .. } = n {
                        u[*feature] = true;
                    }
                }
                u
            })
            .collect();
        ForestClassifier {
            trees,
            leaf_class,
            used,
            n_classes,
            constant: None,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn tree_vote(&self, t: usize, row: &[f64]) -> usize {
        let leaf = self.trees[t].leaf_index(row);
        self.leaf_class[t][leaf]
    }

    /// Vote counts per class.
    pub fn votes(&self, row: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.n_classes];
        if let Some(c) = self.constant {
            v[c] = 1.0;
            return v;
        }
        for t in 0..self.trees.len() {
            v[self.tree_vote(t, row)] += 1.0;
        }
        v
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        argmax_lowest(&self.votes(row))
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Vec<usize> {
        (0..x.rows()).map(|r| self.predict(x.row(r))).collect()
    }

    /// Accuracy on `x` when column `feature` is replaced by `column`.
    /// Only trees splitting on `feature` are re-evaluated, against cached
    /// per-tree votes in `cache`.
    pub(crate) fn accuracy_with_column(
        &self,
        x: &Matrix,
        labels: &[usize],
        cache: &VoteCache,
        feature: usize,
        column: &[f64],
    ) -> f64 {
        if x.rows() == 0 {
            return 0.0;
        }
        if self.constant.is_some() {
            return cache.accuracy(labels);
        }
        let affected: Vec<usize> = (0..self.trees.len()).filter(|&t| self.used[t][feature]).collect();
        let mut row = vec![0.0; x.cols()];
        let mut correct = 0usize;
        for r in 0..x.rows() {
            let mut votes = cache.votes[r].clone();
            if !affected.is_empty() {
                row.copy_from_slice(x.row(r));
                row[feature] = column[r];
                for &t in &affected {
                    votes[cache.per_tree[r][t]] -= 1.0;
                    votes[self.tree_vote(t, &row)] += 1.0;
                }
            }
            if argmax_lowest(&votes) == labels[r] {
                correct += 1;
            }
        }
        correct as f64 / x.rows() as f64
    }

    pub(crate) fn vote_cache(&self, x: &Matrix) -> VoteCache {
        let per_tree: Vec<Vec<usize>> = (0..x.rows())
            .map(|r| (0..self.trees.len()).map(|t| self.tree_vote(t, x.row(r))).collect())
            .collect();
        let votes = (0..x.rows()).map(|r| self.votes(x.row(r))).collect();
        VoteCache { per_tree, votes }
    }
}

pub(crate) struct VoteCache {
    per_tree: Vec<Vec<usize>>,
    votes: Vec<Vec<f64>>,
}

impl VoteCache {
    fn accuracy(&self, labels: &[usize]) -> f64 {
        let correct = self
            .votes
            .iter()
            .zip(labels)
            .filter(|(v, &l)| argmax_lowest(v) == l)
            .count();
        correct as f64 / labels.len().max(1) as f64
    }
}
