use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{Representation, SynthSpec, WidthPolicy};
use crate::error::{Error, Result};
use crate::learners::{Hyperparams, LearnerSpec, Registry, Strategy};
use crate::metafeatures::MetaFeatureOptions;
use crate::metalearn::{MetaMethod, MetaOptions};

/// Where the corpus comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CorpusSource {
    /// Generated by the `synth` stage into `<output_dir>/corpus`.
    Synth(SynthSpec),
    /// Existing files; relative paths resolve against the working directory.
    Files(CorpusFiles),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusFiles {
    pub datasets_dir: PathBuf,
    pub fasta: PathBuf,
    #[serde(default)]
    pub groupings: Option<PathBuf>,
    #[serde(default)]
    pub width_policy: WidthPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatsConfig {
    /// Restrict the tests to the best `top` strategies by aRMSEr; `None`
    /// keeps every strategy.
    pub top: Option<usize>,
    /// Nemenyi significance level; critical values exist for 0.05 and 0.10.
    pub alpha: f64,
    pub iman_davenport: bool,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            top: Some(6),
            alpha: 0.05,
            iman_davenport: false,
        }
    }
}

/// The complete description of a run. Every field has a default, so `{}`
/// runs the planted synthetic corpus end to end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub corpus: CorpusSource,
    /// Strategy ids, `<learner>.<representation>`.
    pub strategies: Vec<String>,
    /// Hyperparameter overrides keyed by learner name.
    pub hyperparams: BTreeMap<String, Hyperparams>,
    pub seed: u64,
    /// Folds of the base-level cross-validation.
    pub cv_folds: usize,
    pub metafeatures: MetaFeatureOptions,
    pub meta: MetaOptions,
    /// Neighbourhood sizes of the k-NN rankers.
    pub knn_k: Vec<usize>,
    /// Label-set sizes of the `cl.TopK` classifiers; `None` means every k
    /// from `m - 1` down to 2.
    pub top_k: Option<Vec<usize>>,
    pub multivariate: bool,
    /// Also run `mvrf.shuffled`.
    pub shuffled_control: bool,
    /// Also run `default`, `oracle` and `random`.
    pub reference_methods: bool,
    /// Explicit method list; replaces everything derived from the fields
    /// above when present.
    pub methods: Option<Vec<MetaMethod>>,
    pub importance: bool,
    pub stats: StatsConfig,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses every logical core.
    pub jobs: Option<usize>,
}

pub const DEFAULT_STRATEGIES: [&str; 7] = [
    "lm.basicmolprop",
    "ridge.fpFCFP4",
    "rforest.allmolprop",
    "rforest.fpFCFP4",
    "ksvmfp.fpFCFP4",
    "fnn.fpFCFP4",
    "gbm.basicmolprop",
];

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: CorpusSource::Synth(SynthSpec::default()),
            strategies: DEFAULT_STRATEGIES.iter().map(|s| s.to_string()).collect(),
            hyperparams: BTreeMap::new(),
            seed: 42,
            cv_folds: 10,
            metafeatures: MetaFeatureOptions::default(),
            meta: MetaOptions::default(),
            knn_k: vec![5, 50],
            top_k: None,
            multivariate: true,
            shuffled_control: true,
            reference_methods: true,
            methods: None,
            importance: true,
            stats: StatsConfig::default(),
            output_dir: PathBuf::from("out"),
            jobs: None,
        }
    }
}

/// Parses `<learner>.<representation>`.
pub fn parse_strategy_id(id: &str) -> Result<Strategy> {
    let (learner, rep) = id
        .split_once('.')
        .ok_or_else(|| Error::Config(format!("strategy id {id:?} is not <learner>.<representation>")))?;
    let rep: Representation = rep.parse()?;
    Ok(Strategy::named(learner, rep))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Strategies with their hyperparameter overrides applied, in config order.
    pub fn resolved_strategies(&self) -> Result<Vec<Strategy>> {
        self.strategies
            .iter()
            .map(|id| {
                let mut s = parse_strategy_id(id)?;
                if let Some(h) = self.hyperparams.get(&s.learner.name) {
                    s.learner = LearnerSpec {
                        hyperparams: h.clone(),
                        ..s.learner
                    };
                }
                Ok(s)
            })
            .collect()
    }

    /// Top-k sizes, largest first, for `m` strategies.
    pub fn resolved_top_k(&self, m: usize) -> Vec<usize> {
        let mut ks = match &self.top_k {
            Some(ks) => ks.clone(),
            None => (2..m).collect(),
        };
        ks.sort_unstable_by(|a, b| b.cmp(a));
        ks.dedup();
        ks
    }

    /// The meta-level methods in execution order.
    pub fn resolved_methods(&self) -> Vec<MetaMethod> {
        if let Some(ms) = &self.methods {
            return ms.clone();
        }
        let mut out = vec![MetaMethod::Classifier { top_k: None }];
        for k in self.resolved_top_k(self.strategies.len()) {
            out.push(MetaMethod::Classifier { top_k: Some(k) });
        }
        for &k in &self.knn_k {
            out.push(MetaMethod::Knn { k: Some(k) });
        }
        if self.multivariate {
            out.push(MetaMethod::Multivariate { shuffled: false });
        }
        if self.shuffled_control {
            out.push(MetaMethod::Multivariate { shuffled: true });
        }
        if self.reference_methods {
            out.extend([MetaMethod::Default, MetaMethod::Oracle, MetaMethod::Random]);
        }
        out
    }

    /// Checks everything that can be checked without touching data.
    pub fn validate(&self, registry: &Registry) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if let CorpusSource::Synth(spec) = &self.corpus {
            spec.validate()?;
        }
        let strategies = self.resolved_strategies()?;
        if strategies.is_empty() {
            return Err(Error::EmptyStrategyList);
        }
        let mut seen = HashSet::new();
        for s in &strategies {
            registry.validate_strategy(s)?;
            if !seen.insert(s.id()) {
                return Err(Error::DuplicateStrategy(s.id()));
            }
        }
        if let Some(unused) = self
            .hyperparams
            .keys()
            .find(|l| !strategies.iter().any(|s| &s.learner.name == *l))
        {
            return bad(format!("hyperparameters given for unused learner {unused:?}"));
        }
        if self.cv_folds < 2 {
            return bad(format!("cv_folds must be at least 2, got {}", self.cv_folds));
        }
        if self.meta.n_folds < 2 {
            return bad(format!("meta.n_folds must be at least 2, got {}", self.meta.n_folds));
        }
        if self.meta.n_trees == 0 || self.meta.mvrf_min_bucket == 0 {
            return bad("meta.n_trees and meta.mvrf_min_bucket must be positive".into());
        }
        if self.importance && self.meta.importance_repeats == 0 {
            return bad("meta.importance_repeats must be positive".into());
        }
        if self.metafeatures.n_bins < 2 {
            return bad(format!("metafeatures.n_bins must be at least 2, got {}", self.metafeatures.n_bins));
        }
        if self.knn_k.contains(&0) {
            return bad("knn_k entries must be positive".into());
        }
        let m = strategies.len();
        if let Some(ks) = &self.top_k {
            if let Some(k) = ks.iter().find(|&&k| k < 1 || k > m) {
                return bad(format!("top_k entry {k} outside 1..={m}"));
            }
        }
        let methods = self.resolved_methods();
        if methods.is_empty() {
            return bad("no meta-level method selected".into());
        }
        for method in &methods {
            if let MetaMethod::Classifier { top_k: Some(k) } = method {
                if *k > m {
                    return bad(format!("{method} needs {k} strategies, only {m} configured"));
                }
            }
        }
        if methods.contains(&MetaMethod::Default) && !seen.contains(&self.meta.default_strategy) {
            return bad(format!(
                "default strategy {:?} is not among the configured strategies",
                self.meta.default_strategy
            ));
        }
        if let Some(top) = self.stats.top {
            if top < 2 {
                return bad(format!("stats.top must be at least 2, got {top}"));
            }
        }
        if self.stats.alpha != 0.05 && self.stats.alpha != 0.10 {
            return bad(format!("stats.alpha must be 0.05 or 0.10, got {}", self.stats.alpha));
        }
        if self.jobs == Some(0) {
            return bad("jobs must be positive".into());
        }
        Ok(())
    }
}
