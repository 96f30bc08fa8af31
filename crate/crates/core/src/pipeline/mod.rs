//! Stage orchestration: configuration, on-disk layout and run manifests.
//!
//! A run is five stages, each reading the previous stages' files from the
//! output directory so that they can also be invoked one at a time:
//!
//! | stage | reads | writes |
//! |-------|-------|--------|
//! | `synth` | config | `corpus/` |
//! | `eval-base` | corpus | `perf/performance.csv`, `perf/checkpoint.jsonl` |
//! | `rank` | performance | `rank/` |
//! | `meta` | corpus, performance | `meta/` |
//! | `stats` | performance | `stats/` |
//!
//! Every CSV and JSON artifact is a pure function of the config and seed.
//! Wall-clock timings live only in `manifest.json`.

mod config;
mod manifest;
mod stages;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::learners::Registry;

pub use config::{parse_strategy_id, CorpusFiles, CorpusSource, RunConfig, StatsConfig, DEFAULT_STRATEGIES};
pub use manifest::{bytes_digest, file_digest, RunManifest, StageRecord, MANIFEST_FILE};
pub use stages::{MethodSummary, MetaSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Synth,
    EvalBase,
    Rank,
    Meta,
    Stats,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Synth, Stage::EvalBase, Stage::Rank, Stage::Meta, Stage::Stats];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::EvalBase => "eval-base",
            Stage::Rank => "rank",
            Stage::Meta => "meta",
            Stage::Stats => "stats",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage {s:?}")))
    }
}

/// File locations under the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn corpus_dir(&self) -> PathBuf {
        self.root.join("corpus")
    }
    pub fn datasets_dir(&self) -> PathBuf {
        self.corpus_dir().join("datasets")
    }
    pub fn fasta(&self) -> PathBuf {
        self.corpus_dir().join("proteins.fasta")
    }
    pub fn groupings(&self) -> PathBuf {
        self.corpus_dir().join("groupings.csv")
    }
    pub fn ground_truth(&self) -> PathBuf {
        self.corpus_dir().join("ground_truth.csv")
    }

    pub fn perf_dir(&self) -> PathBuf {
        self.root.join("perf")
    }
    pub fn performance_csv(&self) -> PathBuf {
        self.perf_dir().join("performance.csv")
    }
    pub fn checkpoint(&self) -> PathBuf {
        self.perf_dir().join("checkpoint.jsonl")
    }

    pub fn rank_dir(&self) -> PathBuf {
        self.root.join("rank")
    }
    pub fn armser_csv(&self) -> PathBuf {
        self.rank_dir().join("armser.csv")
    }
    pub fn ranks_csv(&self) -> PathBuf {
        self.rank_dir().join("ranks.csv")
    }
    pub fn labels_best(&self) -> PathBuf {
        self.rank_dir().join("labels_best.csv")
    }
    pub fn labels_top(&self, k: usize) -> PathBuf {
        self.rank_dir().join(format!("labels_top{k}.csv"))
    }

    pub fn meta_dir(&self) -> PathBuf {
        self.root.join("meta")
    }
    pub fn metafeatures_csv(&self) -> PathBuf {
        self.meta_dir().join("metafeatures.csv")
    }
    pub fn metafeatures_json(&self) -> PathBuf {
        self.meta_dir().join("metafeatures.json")
    }
    pub fn reports_dir(&self) -> PathBuf {
        self.meta_dir().join("reports")
    }
    pub fn report(&self, method_id: &str) -> PathBuf {
        self.reports_dir().join(format!("{method_id}.json"))
    }
    pub fn selection_csv(&self) -> PathBuf {
        self.meta_dir().join("selection.csv")
    }
    pub fn accuracy_csv(&self) -> PathBuf {
        self.meta_dir().join("accuracy.csv")
    }
    pub fn spearman_csv(&self) -> PathBuf {
        self.meta_dir().join("spearman.csv")
    }
    pub fn distribution_csv(&self) -> PathBuf {
        self.meta_dir().join("distribution.csv")
    }
    pub fn importance_csv(&self) -> PathBuf {
        self.meta_dir().join("importance.csv")
    }
    pub fn summary_json(&self) -> PathBuf {
        self.meta_dir().join("summary.json")
    }

    pub fn stats_dir(&self) -> PathBuf {
        self.root.join("stats")
    }
    pub fn friedman_json(&self) -> PathBuf {
        self.stats_dir().join("friedman.json")
    }
    pub fn nemenyi_json(&self) -> PathBuf {
        self.stats_dir().join("nemenyi.json")
    }
    pub fn pairwise_csv(&self) -> PathBuf {
        self.stats_dir().join("pairwise.csv")
    }
    pub fn wilcoxon_csv(&self) -> PathBuf {
        self.stats_dir().join("wilcoxon.csv")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub stage: Stage,
    pub outputs: Vec<PathBuf>,
    /// Some cells or methods failed; the outputs are still usable.
    pub partial: bool,
    pub seconds: f64,
}

pub(crate) struct Ctx<'a> {
    pub config: &'a RunConfig,
    pub registry: &'a Registry,
    pub layout: Layout,
    pub force: bool,
}

/// Files a stage read and wrote.
pub(crate) struct Produced {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub partial: bool,
}

/// Validates the config, runs one stage and records it in the manifest.
pub fn run_stage(config: &RunConfig, stage: Stage, force: bool) -> Result<StageOutcome> {
    let registry = Registry::default();
    config.validate(&registry)?;
    let layout = Layout::new(&config.output_dir);
    fs::create_dir_all(layout.root()).map_err(|e| Error::io(layout.root(), e))?;
    let ctx = Ctx {
        config,
        registry: &registry,
        layout: layout.clone(),
        force,
    };
    let started = Instant::now();
    log::info!("stage {stage} started");
    let produced = match config.jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?;
            pool.install(|| stages::run(&ctx, stage))
        }
        None => stages::run(&ctx, stage),
    }?;
    let seconds = started.elapsed().as_secs_f64();
    log::info!("stage {stage} finished in {seconds:.1}s");

    let mut manifest = RunManifest::load_or_new(layout.root(), config);
    let record = StageRecord {
        inputs: manifest::digest_map(layout.root(), &produced.inputs)?,
        outputs: manifest::digest_map(layout.root(), &produced.outputs)?,
        wall_clock_seconds: seconds,
        partial: produced.partial,
    };
    manifest.stages.insert(stage.name().to_string(), record);
    manifest.save(layout.root())?;
    Ok(StageOutcome {
        stage,
        outputs: produced.outputs,
        partial: produced.partial,
        seconds,
    })
}

/// Every applicable stage in order; `synth` is skipped for file corpora.
pub fn run_pipeline(config: &RunConfig, force: bool) -> Result<Vec<StageOutcome>> {
    Stage::ALL
        .into_iter()
        .filter(|&s| s != Stage::Synth || matches!(config.corpus, CorpusSource::Synth(_)))
        .map(|s| run_stage(config, s, force))
        .collect()
}
