use criterion::{black_box, criterion_group, criterion_main, Criterion};
use metaqsar_core::data::{generate_synthetic_corpus, impute_median_with, Representation, SynthSpec};
use metaqsar_core::learners::{FittedTree, TreeParams};
use metaqsar_core::metafeatures::{dataset_metafeatures, protein_descriptors, ProteinOptions, TcSampling};
use metaqsar_core::perfstore::armser;
use metaqsar_core::stats::friedman_test;
use metaqsar_core::{LearnerSpec, Matrix, PerformanceMatrix, Registry};

/// Deterministic pseudo-random values in [0, 1).
fn values(n: usize, salt: u64) -> Vec<f64> {
    (0..n as u64)
        .map(|i| {
            let x = (i ^ salt).wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
            (x >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

fn scoring(c: &mut Criterion) {
    let (n, m) = (200, 7);
    let flat = values(n * m, 1);
    let rows: Vec<Vec<f64>> = flat.chunks(m).map(|r| r.iter().map(|v| 0.2 + v).collect()).collect();
    let ids: Vec<String> = (0..m).map(|j| format!("s{j}.basicmolprop")).collect();
    let targets: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
    let pm = PerformanceMatrix::from_dense(&ids, &targets, &rows).unwrap();
    c.bench_function("armser 200x7", |b| b.iter(|| armser(black_box(&pm)).unwrap()));
    let perf = Matrix::from_rows(&rows);
    c.bench_function("friedman 200x7", |b| b.iter(|| friedman_test(black_box(&perf)).unwrap()));
}

fn learners(c: &mut Criterion) {
    let (n, p) = (80, 24);
    let x = Matrix::from_vec(n, p, values(n * p, 2));
    let y: Vec<f64> = (0..n).map(|r| x.get(r, 0) * 2.0 + x.get(r, 1)).collect();
    c.bench_function("tree fit 80x24", |b| {
        b.iter(|| FittedTree::fit(black_box(&x), black_box(&y), TreeParams::QSAR, 1))
    });
    let reg = Registry::default();
    let forest = LearnerSpec::new("rforest").with("n_trees", 100usize);
    c.bench_function("forest fit 100 trees 80x24", |b| {
        b.iter(|| reg.fit_matrix(&forest, black_box(&x), black_box(&y), 1).unwrap())
    });
}

fn metafeatures(c: &mut Criterion) {
    let corpus = generate_synthetic_corpus(&SynthSpec { n_targets: 1, ..SynthSpec::default() }, 3).unwrap();
    let record = &corpus.targets[0];
    let d = impute_median_with(record.dataset(Representation::AllMolProp).unwrap(), true).unwrap();
    c.bench_function("dataset metafeatures allmolprop", |b| {
        b.iter(|| dataset_metafeatures(black_box(&d), 10, TcSampling::default(), 1).unwrap())
    });
    let seq = record.protein.sequence().to_string();
    c.bench_function("protein descriptors", |b| {
        b.iter(|| protein_descriptors(black_box(&seq), &ProteinOptions::default()).unwrap())
    });
}

criterion_group!(benches, scoring, learners, metafeatures);
criterion_main!(benches);
