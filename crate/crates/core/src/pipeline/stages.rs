use std::collections::{BTreeMap, HashMap};
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{
    dataset_file_name, generate_synthetic_corpus, impute_median_with, load_corpus, write_dataset,
    write_fasta, write_groupings, TargetRecord, WidthPolicy,
};
use crate::error::{Error, Result};
use crate::learners::{evaluate_cell, Strategy};
use crate::matrix::Matrix;
use crate::metafeatures::{
    assemble_metafeatures, corpus_fingerprint_width, encode_groupings, impute_gaps, write_metadataset,
    GroupingVocab, MetaFeatureGroup,
};
use crate::metalearn::{
    compare_to_default, group_importance, meta_cross_validate, permutation_importance, write_accuracy_csv,
    write_distribution_csv, write_importance_csv, write_selection_csv, write_spearman_csv, DefaultComparison,
    MetaDataset, MetaMethod, SelectionReport,
};
use crate::perfstore::{
    armser, best_strategy_labels, rank_strategies, read_performance_csv, topk_labels, write_armser_csv,
    write_labels_csv, write_performance_csv, write_ranks_csv, Cell, PerformanceMatrix, StrategyKey,
};
use crate::pipeline::manifest::{bytes_digest, file_digest, list_files};
use crate::pipeline::{CorpusSource, Ctx, Produced, Stage};
use crate::stats::{friedman_test_with, nemenyi_posthoc, wilcoxon_signed_rank, write_pairwise_csv, FriedmanOptions, NemenyiOptions};

pub(crate) fn run(ctx: &Ctx, stage: Stage) -> Result<Produced> {
    match stage {
        Stage::Synth => synth(ctx),
        Stage::EvalBase => eval_base(ctx),
        Stage::Rank => rank(ctx),
        Stage::Meta => meta(ctx),
        Stage::Stats => stats(ctx),
    }
}

fn mkdir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Removes and recreates a stage directory so stale files never linger.
fn fresh_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    mkdir(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn rel(ctx: &Ctx, path: &Path) -> PathBuf {
    path.strip_prefix(ctx.layout.root()).unwrap_or(path).to_path_buf()
}

struct CorpusPaths {
    datasets_dir: PathBuf,
    fasta: PathBuf,
    groupings: Option<PathBuf>,
    width_policy: WidthPolicy,
}

fn corpus_paths(ctx: &Ctx) -> CorpusPaths {
    match &ctx.config.corpus {
        CorpusSource::Synth(_) => CorpusPaths {
            datasets_dir: ctx.layout.datasets_dir(),
            fasta: ctx.layout.fasta(),
            groupings: Some(ctx.layout.groupings()),
            // synthetic widths are deliberately small
            width_policy: WidthPolicy::AllowOverride,
        },
        CorpusSource::Files(f) => CorpusPaths {
            datasets_dir: f.datasets_dir.clone(),
            fasta: f.fasta.clone(),
            groupings: f.groupings.clone(),
            width_policy: f.width_policy,
        },
    }
}

/// Loads the corpus and lists the files it was read from.
fn load(ctx: &Ctx) -> Result<(Vec<TargetRecord>, CorpusPaths, Vec<PathBuf>)> {
    let p = corpus_paths(ctx);
    if !p.datasets_dir.is_dir() {
        return Err(Error::InvalidDataset(format!(
            "corpus directory {} does not exist (run synth first?)",
            p.datasets_dir.display()
        )));
    }
    let records = load_corpus(&p.datasets_dir, &p.fasta, p.groupings.as_deref(), p.width_policy)?;
    let mut inputs: Vec<PathBuf> = records
        .iter()
        .flat_map(|r| {
            r.datasets
                .keys()
                .map(|rep| p.datasets_dir.join(dataset_file_name(&r.target_id, *rep)))
                .collect::<Vec<_>>()
        })
        .collect();
    inputs.push(p.fasta.clone());
    inputs.extend(p.groupings.clone());
    let inputs = inputs
        .iter()
        .map(|f| match f.strip_prefix(ctx.layout.root()) {
            Ok(r) => Ok(r.to_path_buf()),
            Err(_) => std::path::absolute(f).map_err(|e| Error::io(f, e)),
        })
        .collect::<Result<_>>()?;
    Ok((records, p, inputs))
}

fn load_perf(ctx: &Ctx) -> Result<PerformanceMatrix> {
    let path = ctx.layout.performance_csv();
    if !path.exists() {
        return Err(Error::InvalidDataset(format!(
            "{} does not exist (run eval-base first?)",
            path.display()
        )));
    }
    read_performance_csv(&path)
}

fn synth(ctx: &Ctx) -> Result<Produced> {
    let CorpusSource::Synth(spec) = &ctx.config.corpus else {
        return Err(Error::Config("synth needs a corpus.synth spec".into()));
    };
    let dir = ctx.layout.corpus_dir();
    let occupied = dir.is_dir()
        && fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .next()
            .is_some();
    if occupied && !ctx.force {
        return Err(Error::OutputNotEmpty(dir));
    }
    let corpus = generate_synthetic_corpus(spec, ctx.config.seed)?;
    fresh_dir(&dir)?;
    let datasets = ctx.layout.datasets_dir();
    mkdir(&datasets)?;
    corpus.targets.par_iter().try_for_each(|t| {
        t.datasets
            .values()
            .try_for_each(|d| write_dataset(&datasets.join(dataset_file_name(&t.target_id, d.representation())), d))
    })?;
    let proteins = corpus.proteins();
    write_fasta(&ctx.layout.fasta(), &proteins)?;
    write_groupings(&ctx.layout.groupings(), &proteins)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for g in &corpus.truth {
        w.serialize(g)?;
    }
    let path = ctx.layout.ground_truth();
    let bytes = w.into_inner().map_err(|e| Error::io(&path, e.into_error()))?;
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    log::info!("wrote {} synthetic targets", corpus.targets.len());
    Ok(Produced {
        inputs: Vec::new(),
        outputs: list_files(ctx.layout.root(), &dir)?,
        partial: false,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointEntry {
    target_id: String,
    strategy: String,
    /// Digest of everything the cell depends on.
    key: String,
    cell: Cell,
}

fn cell_key(strategy: &Strategy, dataset_digest: Option<&str>, folds: usize, seed: u64) -> Result<String> {
    let doc = serde_json::json!({
        "strategy": strategy,
        "dataset": dataset_digest,
        "folds": folds,
        "seed": seed,
    });
    Ok(bytes_digest(&serde_json::to_vec(&doc)?))
}

/// Completed cells from an earlier, possibly interrupted, run. A torn
/// final line is ignored.
fn read_checkpoint(path: &Path) -> Result<HashMap<(String, String), (String, Cell)>> {
    let mut out = HashMap::new();
    if !path.exists() {
        return Ok(out);
    }
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    for line in BufReader::new(f).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        match serde_json::from_str::<CheckpointEntry>(&line) {
            Ok(e) => {
                out.insert((e.target_id, e.strategy), (e.key, e.cell));
            }
            Err(_) if line.trim().is_empty() => {}
            Err(e) => log::warn!("ignoring unreadable checkpoint line: {e}"),
        }
    }
    Ok(out)
}

fn eval_base(ctx: &Ctx) -> Result<Produced> {
    let strategies = ctx.config.resolved_strategies()?;
    let (records, paths, inputs) = load(ctx)?;
    let (folds, seed) = (ctx.config.cv_folds, ctx.config.seed);
    mkdir(&ctx.layout.perf_dir())?;
    let checkpoint = ctx.layout.checkpoint();
    if ctx.force && checkpoint.exists() {
        fs::remove_file(&checkpoint).map_err(|e| Error::io(&checkpoint, e))?;
    }
    let done = read_checkpoint(&checkpoint)?;

    let m = strategies.len();
    let mut keys = Vec::with_capacity(records.len() * m);
    for r in &records {
        for s in &strategies {
            let digest = match r.dataset(s.representation) {
                Some(_) => Some(file_digest(
                    &paths.datasets_dir.join(dataset_file_name(&r.target_id, s.representation)),
                )?),
                None => None,
            };
            keys.push(cell_key(s, digest.as_deref(), folds, seed)?);
        }
    }
    let mut cells: Vec<Option<Cell>> = (0..keys.len())
        .map(|k| {
            let id = (records[k / m].target_id.clone(), strategies[k % m].id());
            done.get(&id).filter(|(key, _)| *key == keys[k]).map(|(_, c)| c.clone())
        })
        .collect();
    let todo: Vec<usize> = (0..cells.len()).filter(|&k| cells[k].is_none()).collect();
    log::info!("{} cells cached, {} to evaluate", cells.len() - todo.len(), todo.len());

    if !todo.is_empty() {
        let imputed: Vec<TargetRecord> = records
            .par_iter()
            .map(|r| {
                let mut r = r.clone();
                for d in r.datasets.values_mut() {
                    *d = impute_median_with(d, true)?;
                }
                Ok(r)
            })
            .collect::<Result<_>>()?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&checkpoint)
            .map_err(|e| Error::io(&checkpoint, e))?;
        let writer = Mutex::new(std::io::BufWriter::new(file));
        let fresh: Vec<(usize, Cell)> = todo
            .par_iter()
            .map(|&k| {
                let (record, strategy) = (&imputed[k / m], &strategies[k % m]);
                let cell = evaluate_cell(ctx.registry, record, strategy, folds, seed);
                let entry = CheckpointEntry {
                    target_id: record.target_id.clone(),
                    strategy: strategy.id(),
                    key: keys[k].clone(),
                    cell: cell.clone(),
                };
                let mut line = serde_json::to_vec(&entry)?;
                line.push(b'\n');
                let mut w = writer.lock().expect("checkpoint writer poisoned");
                w.write_all(&line)
                    .and_then(|_| w.flush())
                    .map_err(|e| Error::io(&checkpoint, e))?;
                Ok((k, cell))
            })
            .collect::<Result<_>>()?;
        for (k, cell) in fresh {
            cells[k] = Some(cell);
        }
    }

    let pm = PerformanceMatrix::new(
        strategies.iter().map(StrategyKey::from).collect(),
        records.iter().map(|r| r.target_id.clone()).collect(),
        cells.into_iter().map(|c| c.expect("every cell evaluated")).collect(),
    )?;
    write_performance_csv(&ctx.layout.performance_csv(), &pm)?;
    let partial = pm.has_failures();
    if partial {
        log::warn!("some cells failed or were skipped; see the status column");
    }
    Ok(Produced {
        inputs,
        outputs: vec![rel(ctx, &ctx.layout.performance_csv()), rel(ctx, &checkpoint)],
        partial,
    })
}

fn rank(ctx: &Ctx) -> Result<Produced> {
    let pm = load_perf(ctx)?;
    fresh_dir(&ctx.layout.rank_dir())?;
    let scores = armser(&pm)?;
    if scores.len() < pm.n_strategies() {
        log::warn!(
            "{} of {} strategies exceed the missing-cell limit and are not scored",
            pm.n_strategies() - scores.len(),
            pm.n_strategies()
        );
    }
    write_armser_csv(&ctx.layout.armser_csv(), &scores)?;
    write_ranks_csv(&ctx.layout.ranks_csv(), &pm, &rank_strategies(&pm))?;
    write_labels_csv(&ctx.layout.labels_best(), &best_strategy_labels(&pm)?, "all")?;
    let mut outputs = vec![ctx.layout.armser_csv(), ctx.layout.ranks_csv(), ctx.layout.labels_best()];
    for k in ctx.config.resolved_top_k(pm.n_strategies()) {
        let path = ctx.layout.labels_top(k);
        write_labels_csv(&path, &topk_labels(&pm, k)?, &format!("top{k}"))?;
        outputs.push(path);
    }
    Ok(Produced {
        inputs: vec![rel(ctx, &ctx.layout.performance_csv())],
        outputs: outputs.iter().map(|p| rel(ctx, p)).collect(),
        partial: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub accuracy: f64,
    pub baseline_accuracy: f64,
    pub mean_realized_rmse: f64,
    pub mean_default_rmse: Option<f64>,
    pub mean_spearman: Option<f64>,
    pub default_comparison: Option<DefaultComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub n_features: usize,
    pub mean_decrease_accuracy: f64,
    pub max_decrease_accuracy: f64,
}

/// `meta/summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaSummary {
    pub n_targets: usize,
    pub n_strategies: usize,
    pub n_metafeatures: usize,
    pub methods: Vec<MethodSummary>,
    /// Methods that failed, with the error message.
    pub failed: BTreeMap<String, String>,
    pub group_importance: Option<BTreeMap<String, GroupSummary>>,
}

fn summarize(report: &SelectionReport) -> MethodSummary {
    let comparison = if report.method == MetaMethod::Default.id() {
        None
    } else {
        compare_to_default(report).ok()
    };
    MethodSummary {
        method: report.method.clone(),
        accuracy: report.accuracy,
        baseline_accuracy: report.baseline_accuracy,
        mean_realized_rmse: report.mean_realized_rmse,
        mean_default_rmse: report.mean_default_rmse,
        mean_spearman: report.mean_spearman,
        default_comparison: comparison,
    }
}

fn meta(ctx: &Ctx) -> Result<Produced> {
    let (config, layout) = (ctx.config, &ctx.layout);
    let (records, _, mut inputs) = load(ctx)?;
    let pm = load_perf(ctx)?;
    inputs.push(rel(ctx, &layout.performance_csv()));
    fresh_dir(&layout.meta_dir())?;
    mkdir(&layout.reports_dir())?;

    let fp_width = corpus_fingerprint_width(&records);
    let vectors = records
        .par_iter()
        .map(|r| assemble_metafeatures(r, &config.metafeatures, fp_width, None, config.seed))
        .collect::<Result<Vec<_>>>()?;
    let proteins: Vec<_> = records.iter().map(|r| r.protein.clone()).collect();
    let md = MetaDataset::new(&vectors, &proteins, &pm)?;

    // the exported table is gap-filled with corpus medians and carries the
    // grouping encodings; meta-CV recomputes both per fold
    let mut export = vectors.clone();
    impute_gaps(&mut export)?;
    if config.meta.use_groupings {
        let vocab = GroupingVocab::build(proteins.iter());
        for (v, p) in export.iter_mut().zip(&proteins) {
            for (name, value) in encode_groupings(p, &vocab) {
                v.push(name, value, MetaFeatureGroup::Grouping);
            }
        }
    }
    write_metadataset(&layout.metafeatures_csv(), &layout.metafeatures_json(), &export)?;
    let mut outputs = vec![layout.metafeatures_csv(), layout.metafeatures_json()];

    let mut reports = Vec::new();
    let mut failed = BTreeMap::new();
    for method in config.resolved_methods() {
        log::info!("meta-CV for {method}");
        match meta_cross_validate(&md, method, &config.meta, config.seed) {
            Ok(report) => {
                let path = layout.report(&method.id());
                write_json(&path, &report)?;
                outputs.push(path);
                reports.push(report);
            }
            Err(e) if e.is_config_error() => return Err(e),
            Err(e) => {
                log::error!("{method} failed: {e}");
                failed.insert(method.id(), e.to_string());
            }
        }
    }
    write_selection_csv(&layout.selection_csv(), &reports)?;
    write_accuracy_csv(&layout.accuracy_csv(), &reports)?;
    write_spearman_csv(&layout.spearman_csv(), &reports)?;
    write_distribution_csv(&layout.distribution_csv(), &reports)?;
    outputs.extend([
        layout.selection_csv(),
        layout.accuracy_csv(),
        layout.spearman_csv(),
        layout.distribution_csv(),
    ]);

    let group_summary = if config.importance {
        log::info!("permutation importance");
        let importances = permutation_importance(&md, &config.meta, config.seed)?;
        write_importance_csv(&layout.importance_csv(), &importances)?;
        outputs.push(layout.importance_csv());
        Some(
            group_importance(&importances)
                .into_iter()
                .map(|(g, v)| {
                    let summary = GroupSummary {
                        n_features: v.len(),
                        mean_decrease_accuracy: v.iter().sum::<f64>() / v.len().max(1) as f64,
                        max_decrease_accuracy: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    };
                    (g.token().to_string(), summary)
                })
                .collect(),
        )
    } else {
        None
    };
    let summary = MetaSummary {
        n_targets: md.n_targets(),
        n_strategies: pm.n_strategies(),
        n_metafeatures: md.feature_names().len(),
        methods: reports.iter().map(summarize).collect(),
        failed: failed.clone(),
        group_importance: group_summary,
    };
    write_json(&layout.summary_json(), &summary)?;
    outputs.push(layout.summary_json());
    Ok(Produced {
        inputs,
        outputs: outputs.iter().map(|p| rel(ctx, p)).collect(),
        partial: !failed.is_empty(),
    })
}

fn stats(ctx: &Ctx) -> Result<Produced> {
    let (config, layout) = (ctx.config, &ctx.layout);
    let pm = load_perf(ctx)?;
    fresh_dir(&layout.stats_dir())?;
    let mut scores = armser(&pm)?;
    scores.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let keep = config.stats.top.map_or(scores.len(), |t| t.min(scores.len()));
    if keep < 2 {
        return Err(Error::DegenerateDimensions(format!(
            "statistical comparison needs at least 2 scored strategies, found {keep}"
        )));
    }
    let names: Vec<String> = scores[..keep].iter().map(|(id, _)| id.clone()).collect();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| pm.strategy_index(n).expect("scored strategy is in the matrix"))
        .collect();
    let rows: Vec<Vec<f64>> = (0..pm.n_targets())
        .filter_map(|t| idx.iter().map(|&s| pm.rmse(t, s)).collect::<Option<Vec<f64>>>())
        .collect();
    if rows.len() < pm.n_targets() {
        log::warn!(
            "{} targets lack a result for some compared strategy and are left out",
            pm.n_targets() - rows.len()
        );
    }
    if rows.len() < 2 {
        return Err(Error::DegenerateDimensions(format!(
            "only {} targets have results for every compared strategy",
            rows.len()
        )));
    }
    let perf = Matrix::from_rows(&rows);
    let friedman = friedman_test_with(
        &perf,
        FriedmanOptions {
            iman_davenport: config.stats.iman_davenport,
        },
    )?
    .with_extra("strategies", names.clone())
    .with_extra("n_targets", rows.len());
    write_json(&layout.friedman_json(), &friedman)?;
    let nemenyi = nemenyi_posthoc(
        &perf,
        NemenyiOptions {
            alpha: config.stats.alpha,
            q_alpha: None,
        },
    )?;
    write_json(
        &layout.nemenyi_json(),
        &nemenyi.to_test_result().with_extra("strategies", names.clone()),
    )?;
    write_pairwise_csv(&layout.pairwise_csv(), &names, &nemenyi)?;

    // best strategy against each of the others
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["strategy_a", "strategy_b", "n", "statistic", "p_value"])?;
    let column = |j: usize| -> Vec<f64> { rows.iter().map(|r| r[j]).collect() };
    for j in 1..keep {
        let t = wilcoxon_signed_rank(&column(0), &column(j))?;
        w.write_record([
            names[0].clone(),
            names[j].clone(),
            rows.len().to_string(),
            t.statistic.to_string(),
            t.p_value.to_string(),
        ])?;
    }
    let path = layout.wilcoxon_csv();
    let bytes = w.into_inner().map_err(|e| Error::io(&path, e.into_error()))?;
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    let outputs = [layout.friedman_json(), layout.nemenyi_json(), layout.pairwise_csv(), path];
    Ok(Produced {
        inputs: vec![rel(ctx, &layout.performance_csv())],
        outputs: outputs.iter().map(|p| rel(ctx, p)).collect(),
        partial: false,
    })
}
