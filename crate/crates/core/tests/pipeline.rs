//! Stage orchestration on a small synthetic run: determinism, checkpoint
//! resume and manifest verification.

use std::fs;
use std::path::{Path, PathBuf};

use metaqsar_core::data::{generate_synthetic_corpus, SynthSpec};
use metaqsar_core::metalearn::MetaOptions;
use metaqsar_core::pipeline::{run_pipeline, run_stage, CorpusSource, Layout, RunConfig, RunManifest, Stage};

fn small_config(out: &Path) -> RunConfig {
    RunConfig {
        corpus: CorpusSource::Synth(SynthSpec {
            n_targets: 24,
            compounds_min: 25,
            compounds_max: 40,
            ..SynthSpec::default()
        }),
        strategies: ["lm.basicmolprop", "fnn.basicmolprop", "ridge.fpFCFP4", "rtree.allmolprop"]
            .map(String::from)
            .to_vec(),
        seed: 7,
        cv_folds: 5,
        meta: MetaOptions {
            n_folds: 4,
            n_trees: 30,
            importance_repeats: 2,
            default_strategy: "ridge.fpFCFP4".into(),
            ..MetaOptions::default()
        },
        knn_k: vec![3],
        stats: metaqsar_core::pipeline::StatsConfig {
            top: Some(3),
            ..Default::default()
        },
        output_dir: out.to_path_buf(),
        ..RunConfig::default()
    }
}

fn files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if !p.ends_with("manifest.json") && !p.ends_with("checkpoint.jsonl") {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

#[test]
fn reruns_are_byte_identical_and_resume_from_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let outcomes = run_pipeline(&small_config(&a), false).unwrap();
    assert_eq!(outcomes.len(), 5);
    run_pipeline(&small_config(&b), false).unwrap();
    let listed = files(&a);
    assert_eq!(listed, files(&b));
    assert!(listed.len() > 24 * 3);
    for rel in &listed {
        assert_eq!(fs::read(a.join(rel)).unwrap(), fs::read(b.join(rel)).unwrap(), "{}", rel.display());
    }

    let manifest = RunManifest::load(&a).unwrap();
    assert_eq!(manifest.stages.len(), 5);
    assert!(manifest.verify(&a).unwrap().is_empty());

    // drop half the checkpoint and the matrix, then resume
    let layout = Layout::new(&b);
    let text = fs::read_to_string(layout.checkpoint()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 24 * 4);
    fs::write(layout.checkpoint(), lines[..lines.len() / 2].join("\n") + "\n").unwrap();
    fs::remove_file(layout.performance_csv()).unwrap();
    run_stage(&small_config(&b), Stage::EvalBase, false).unwrap();
    assert_eq!(
        fs::read(layout.performance_csv()).unwrap(),
        fs::read(Layout::new(&a).performance_csv()).unwrap()
    );
}

#[test]
fn tampered_output_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_config(tmp.path());
    run_stage(&config, Stage::Synth, false).unwrap();
    let manifest = RunManifest::load(tmp.path()).unwrap();
    assert!(manifest.verify(tmp.path()).unwrap().is_empty());
    let target = Layout::new(tmp.path()).fasta();
    fs::write(&target, ">X\nAAAA\n").unwrap();
    assert_eq!(manifest.verify(tmp.path()).unwrap(), vec!["corpus/proteins.fasta".to_string()]);
}

#[test]
fn synth_refuses_a_populated_corpus_without_force() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_config(tmp.path());
    run_stage(&config, Stage::Synth, false).unwrap();
    let err = run_stage(&config, Stage::Synth, false).unwrap_err();
    assert!(err.is_config_error(), "{err}");
    run_stage(&config, Stage::Synth, true).unwrap();
}

#[test]
fn synthetic_corpus_is_a_function_of_spec_and_seed() {
    let spec = SynthSpec {
        n_targets: 10,
        ..SynthSpec::default()
    };
    // missing cells are NaN, so compare renderings rather than with PartialEq
    let render = |seed| format!("{:?}", generate_synthetic_corpus(&spec, seed).unwrap());
    let first = render(3);
    assert_eq!(first, render(3));
    assert_ne!(first, render(4));
}
