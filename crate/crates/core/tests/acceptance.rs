//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any of them fails. Built with `harness = false`.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use metaqsar_core::data::AMINO_ACIDS;
use metaqsar_core::learners::{tanimoto_kernel, FittedTree, TreeParams};
use metaqsar_core::metafeatures::{
    aliphatic_index, boman_index, dipeptide_composition, diwv, entropy_codes, entropy_normalized,
    instability_index, isoelectric_point, mutual_information_codes, net_charge,
    total_correlation_codes, PkaSet,
};
use metaqsar_core::metalearn::SelectionReport;
use metaqsar_core::perfstore::armser;
use metaqsar_core::pipeline::{run_pipeline, RunConfig, MANIFEST_FILE};
use metaqsar_core::stats::{
    chi_square_cdf, friedman_test, nemenyi_posthoc, spearman, wilcoxon_signed_rank, NemenyiOptions,
};
use metaqsar_core::{LearnerSpec, Matrix, PerformanceMatrix, Registry};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ids(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("s{j}.basicmolprop")).collect()
}

fn targets(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("t{i}")).collect()
}

fn random_rmse_matrices() -> Vec<Vec<Vec<f64>>> {
    let mut r = rng(1);
    (0..100)
        .map(|_| {
            let m = r.gen_range(2..=8);
            let n = r.gen_range(2..=30);
            (0..n)
                .map(|_| (0..m).map(|_| r.gen_range(0.05..3.0)).collect())
                .collect()
        })
        .collect()
}

fn scores(rows: &[Vec<f64>]) -> Result<Vec<f64>, String> {
    let m = rows[0].len();
    let pm = PerformanceMatrix::from_dense(&ids(m), &targets(rows.len()), rows).map_err(|e| e.to_string())?;
    Ok(armser(&pm).map_err(|e| e.to_string())?.into_iter().map(|(_, v)| v).collect())
}

/// `(1/m) Σ_q (Π_i r_q^i / r_p^i)^(1/n)` evaluated literally.
fn armser_oracle(rows: &[Vec<f64>]) -> Vec<f64> {
    let (n, m) = (rows.len(), rows[0].len());
    (0..m)
        .map(|p| {
            let total: f64 = (0..m)
                .map(|q| {
                    let prod: f64 = rows.iter().map(|row| row[q] / row[p]).product();
                    prod.powf(1.0 / n as f64)
                })
                .sum();
            total / m as f64
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for rows in random_rmse_matrices() {
        let got = scores(&rows)?;
        let want = armser_oracle(&rows);
        ensure(got.len() == want.len(), || "scored strategy count differs".into())?;
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    let worked = scores(&[vec![1.0, 2.0], vec![2.0, 4.0]])?;
    ensure(
        (worked[0] - 1.5).abs() < 1e-12 && (worked[1] - 0.75).abs() < 1e-12,
        || format!("worked example gave {worked:?}"),
    )?;
    let secs = started.elapsed().as_secs_f64();
    ensure(secs < 5.0, || format!("took {secs:.1}s"))?;
    Ok(format!("max deviation {worst:.1e} over 100 matrices; worked example (1.5, 0.75); {secs:.2}s"))
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for rows in random_rmse_matrices() {
        let base = scores(&rows)?;
        let scaled: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| {
                let c = 10f64.powf(r.gen_range(-3.0..3.0));
                row.iter().map(|v| v * c).collect()
            })
            .collect();
        for (a, b) in base.iter().zip(scores(&scaled)?) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e} under per-target rescaling"))
}

fn oracle_ranks(v: &[f64]) -> Vec<f64> {
    // rank of x = (count below) + (count equal + 1) / 2
    v.iter()
        .map(|&x| {
            let below = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn oracle_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    cov / (va * vb).sqrt()
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let (mut worst, mut tied): (f64, usize) = (0.0, 0);
    let mut cases = 0;
    while cases < 100 {
        let n = r.gen_range(3..40);
        let with_ties = cases % 5 < 2;
        let draw = |r: &mut ChaCha8Rng| -> f64 {
            if with_ties {
                r.gen_range(0..4) as f64
            } else {
                r.gen_range(-1.0..1.0)
            }
        };
        let a: Vec<f64> = (0..n).map(|_| draw(&mut r)).collect();
        let b: Vec<f64> = (0..n).map(|_| draw(&mut r)).collect();
        let constant = |v: &[f64]| v.iter().all(|x| *x == v[0]);
        if constant(&a) || constant(&b) {
            continue;
        }
        let want = oracle_pearson(&oracle_ranks(&a), &oracle_ranks(&b));
        let got = spearman(&a, &b).map_err(|e| e.to_string())?;
        worst = worst.max((got - want).abs());
        let has_tie = |v: &[f64]| oracle_ranks(v).iter().any(|x| x.fract() != 0.0);
        tied += usize::from(has_tie(&a) || has_tie(&b));
        cases += 1;
    }
    ensure(tied >= 30, || format!("only {tied} tied cases"))?;
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    let exact = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).map_err(|e| e.to_string())?;
    ensure(exact == 0.8, || format!("(1,2,3,4)/(1,3,2,4) gave {exact}"))?;
    Ok(format!("max deviation {worst:.1e}, {tied} tied cases; worked pair 0.8"))
}

/// Γ(df/2) for integer `df`, from Γ(1) = 1 and Γ(1/2) = √π.
fn half_gamma(df: u32) -> f64 {
    let (mut g, mut a) = if df % 2 == 0 { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    while a < df as f64 / 2.0 {
        g *= a;
        a += 1.0;
    }
    g
}

/// `P(k/2, x/2)` by the power series `e^{-t} t^a / Γ(a+1) Σ t^j / ((a+1)…(a+j))`.
fn chi_square_series(x: f64, df: u32) -> f64 {
    let a = df as f64 / 2.0;
    let t = x / 2.0;
    let (mut term, mut sum) = (1.0, 1.0);
    for j in 1..2000 {
        term *= t / (a + j as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    (a * t.ln() - t).exp() / (half_gamma(df) * a) * sum
}

fn criterion_4() -> Outcome {
    let ordered = Matrix::from_rows(&vec![vec![1.0, 2.0, 3.0]; 10]);
    let f = friedman_test(&ordered).map_err(|e| e.to_string())?;
    ensure((f.statistic - 20.0).abs() <= 1e-9, || format!("chi2_F = {}", f.statistic))?;
    let nem = nemenyi_posthoc(&ordered, NemenyiOptions::default()).map_err(|e| e.to_string())?;
    ensure(nem.is_significant(0, 2), || "pair (A, C) not significant".into())?;

    let flat = Matrix::from_rows(&vec![vec![0.5, 0.5, 0.5]; 10]);
    let f0 = friedman_test(&flat).map_err(|e| e.to_string())?;
    ensure(f0.statistic == 0.0 && f0.p_value == 1.0, || {
        format!("identical columns gave ({}, {})", f0.statistic, f0.p_value)
    })?;

    let mut worst: f64 = 0.0;
    for df in [1u32, 2, 3, 5, 9] {
        for i in 1..=10 {
            let x = 3.0 * i as f64 * (df as f64).sqrt() / 2.0;
            worst = worst.max((chi_square_cdf(x, df as f64) - chi_square_series(x, df)).abs());
        }
    }
    ensure(worst <= 1e-10, || format!("chi-square CDF deviation {worst:e}"))?;
    Ok(format!(
        "chi2_F = {}, CD = {:.4}, (A,C) significant; flat p = 1; CDF deviation {worst:.1e}",
        f.statistic, nem.critical_difference
    ))
}

fn random_sequence(r: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| AMINO_ACIDS[r.gen_range(0..20)] as char).collect()
}

/// Boman solubility values in their published sign convention; the index
/// is the negated mean.
fn boman_oracle(seq: &str) -> f64 {
    let table: HashMap<char, f64> = [
        ('L', 4.92), ('I', 4.92), ('V', 4.04), ('F', 2.98), ('M', 2.35), ('W', 2.33),
        ('A', 1.81), ('C', 1.28), ('G', 0.94), ('Y', -0.14), ('T', -2.57), ('S', -3.40),
        ('H', -4.66), ('Q', -5.54), ('K', -5.55), ('N', -6.64), ('E', -6.81), ('D', -8.72),
        ('R', -14.92), ('P', 0.0),
    ]
    .into_iter()
    .collect();
    -seq.chars().map(|c| table[&c]).sum::<f64>() / seq.len() as f64
}

fn instability_oracle(seq: &str) -> f64 {
    let b = seq.as_bytes();
    let mut sum = 0.0;
    for i in 0..b.len() - 1 {
        sum += diwv(b[i], b[i + 1]).expect("canonical residues");
    }
    sum * 10.0 / b.len() as f64
}

fn criterion_5() -> Outcome {
    let started = Instant::now();
    let e = |e: metaqsar_core::Error| e.to_string();
    let a4 = aliphatic_index("AAAA").map_err(e)?;
    let alvi = aliphatic_index("ALVI").map_err(e)?;
    ensure((a4 - 100.0).abs() < 1e-9 && (alvi - 292.5).abs() < 1e-9, || {
        format!("aliphatic index AAAA = {a4}, ALVI = {alvi}")
    })?;

    let mut r = rng(5);
    let mut worst_sum: f64 = 0.0;
    for _ in 0..1000 {
        let len = r.gen_range(2..300);
        let comp = dipeptide_composition(&random_sequence(&mut r, len)).map_err(e)?;
        worst_sum = worst_sum.max((comp.iter().sum::<f64>() - 1.0).abs());
    }
    ensure(worst_sum <= 1e-12, || format!("dipeptide sum deviation {worst_sum:e}"))?;

    let mut worst_charge: f64 = 0.0;
    for _ in 0..100 {
        let len = r.gen_range(1..500);
        let seq = random_sequence(&mut r, len);
        let pi = isoelectric_point(&seq, PkaSet::Lehninger).map_err(e)?;
        worst_charge = worst_charge.max(net_charge(&seq, pi.ph, PkaSet::Lehninger).map_err(e)?.abs());
    }
    ensure(worst_charge < 1e-4, || format!("|charge at pI| up to {worst_charge:e}"))?;

    // entries checked against the published dipeptide weight table
    for (pair, w) in [("WW", 1.0), ("AC", 44.94), ("RP", 20.26), ("YP", 13.34), ("EG", 1.0)] {
        let b = pair.as_bytes();
        ensure(diwv(b[0], b[1]) == Some(w), || format!("weight of {pair} is {:?}", diwv(b[0], b[1])))?;
    }
    let mut refs: Vec<String> = ["MKTAYIAKQR", "GGGG", "WPWPWP", "ACDEFGHIKLMNPQRSTVWY", "RRRRKKKKDE"]
        .map(String::from)
        .to_vec();
    while refs.len() < 20 {
        let len = r.gen_range(2..120);
        refs.push(random_sequence(&mut r, len));
    }
    let mut worst_table: f64 = 0.0;
    for seq in &refs {
        worst_table = worst_table
            .max((instability_index(seq).map_err(e)? - instability_oracle(seq)).abs())
            .max((boman_index(seq).map_err(e)? - boman_oracle(seq)).abs());
    }
    ensure(worst_table <= 1e-9, || format!("table-walk deviation {worst_table:e}"))?;
    let secs = started.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "ALVI = {alvi}; dipeptide sum {worst_sum:.1e}; |q(pI)| {worst_charge:.1e}; tables {worst_table:.1e}; {secs:.2}s"
    ))
}

fn criterion_6() -> Outcome {
    let e = |e: metaqsar_core::Error| e.to_string();
    let mut worst_indep: f64 = 0.0;
    for (a, b, c, reps) in [(2, 2, 2, 1), (3, 4, 2, 5), (5, 2, 3, 2), (4, 4, 4, 3)] {
        let n = a * b * c * reps;
        let x: Vec<usize> = (0..n).map(|i| i % a).collect();
        let y: Vec<usize> = (0..n).map(|i| (i / a) % b).collect();
        let z: Vec<usize> = (0..n).map(|i| (i / (a * b)) % c).collect();
        worst_indep = worst_indep
            .max(mutual_information_codes(&x, &y).map_err(e)?)
            .max(total_correlation_codes(&[x.clone(), y.clone()]).map_err(e)?)
            .max(total_correlation_codes(&[x, y, z]).map_err(e)?);
    }
    ensure(worst_indep <= 1e-12, || format!("independent MI/TC up to {worst_indep:e}"))?;

    let mut r = rng(6);
    let (mut worst_self, mut out_of_range) = (0.0f64, 0usize);
    for i in 0..1000 {
        let n = r.gen_range(1..200);
        let bins = r.gen_range(2..12);
        let codes: Vec<usize> = (0..n).map(|_| r.gen_range(0..bins)).collect();
        let mi = mutual_information_codes(&codes, &codes).map_err(e)?;
        worst_self = worst_self.max((mi - entropy_codes(&codes)).abs());
        let x: Vec<f64> = if i % 10 == 0 {
            vec![1.5; n]
        } else {
            (0..n).map(|_| r.gen_range(-5.0..5.0f64).powi(3)).collect()
        };
        let h = entropy_normalized(&x, bins).map_err(e)?;
        out_of_range += usize::from(!(0.0..=1.0).contains(&h));
    }
    ensure(worst_self <= 1e-12, || format!("|MI(x,x) - H(x)| up to {worst_self:e}"))?;
    ensure(out_of_range == 0, || format!("{out_of_range} normalized entropies outside [0, 1]"))?;
    Ok(format!("independent MI/TC {worst_indep:.1e}; |MI(x,x)-H(x)| {worst_self:.1e}; entropies in [0,1]"))
}

fn random_matrix(r: &mut ChaCha8Rng, n: usize, p: usize) -> Matrix {
    Matrix::from_vec(n, p, (0..n * p).map(|_| r.gen_range(-1.0..1.0)).collect())
}

fn criterion_7() -> Outcome {
    let e = |e: metaqsar_core::Error| e.to_string();
    let mut r = rng(7);
    let params = TreeParams::QSAR;
    let mut splits = 0;
    for i in 0..200 {
        let n = r.gen_range(5..250);
        let p = r.gen_range(1..8);
        let x = random_matrix(&mut r, n, p);
        let y: Vec<f64> = (0..n).map(|k| x.get(k, 0).signum() + 0.3 * r.gen_range(-1.0..1.0)).collect();
        let tree = FittedTree::fit(&x, &y, params, i);
        // an unsplit root may hold fewer rows than min_bucket
        let split = tree.n_leaves() > 1;
        ensure(!split || tree.leaf_sizes().iter().all(|&s| s >= params.min_bucket), || {
            format!("dataset {i}: leaf below min_bucket: {:?}", tree.leaf_sizes())
        })?;
        ensure(tree.split_sizes().iter().all(|&s| s >= params.min_split), || {
            format!("dataset {i}: split below min_split: {:?}", tree.split_sizes())
        })?;
        ensure(n >= params.min_split || !split, || format!("dataset {i}: {n} rows were split"))?;
        splits += tree.split_sizes().len();
    }

    let reg = Registry::default();
    let mut worst_ridge: f64 = 0.0;
    let mut tree_mismatch = 0;
    for i in 0..20 {
        let (n, p) = (r.gen_range(30..120), r.gen_range(1..10));
        let x = random_matrix(&mut r, n, p);
        let y: Vec<f64> = (0..n)
            .map(|k| (0..p).map(|j| (j as f64 + 1.0) * x.get(k, j)).sum::<f64>() + r.gen_range(-0.5..0.5))
            .collect();
        let ols = reg.fit_matrix(&LearnerSpec::new("lm"), &x, &y, i).map_err(e)?;
        let ridge = reg.fit_matrix(&LearnerSpec::new("ridge").with("lambda", 0.0), &x, &y, i).map_err(e)?;
        let tree = reg.fit_matrix(&LearnerSpec::new("rtree"), &x, &y, i).map_err(e)?;
        let forest_spec = LearnerSpec::new("rforest")
            .with("n_trees", 1usize)
            .with("bootstrap", false)
            .with("mtry", p);
        let forest = reg.fit_matrix(&forest_spec, &x, &y, i + 1000).map_err(e)?;
        let probe = random_matrix(&mut r, 50, p);
        for k in 0..probe.rows() {
            let row = probe.row(k);
            let d = ols.predict(row).map_err(e)? - ridge.predict(row).map_err(e)?;
            worst_ridge = worst_ridge.max(d.abs());
            tree_mismatch += usize::from(tree.predict(row).map_err(e)? != forest.predict(row).map_err(e)?);
        }
    }
    ensure(worst_ridge <= 1e-8, || format!("ridge(0) vs OLS deviation {worst_ridge:e}"))?;
    ensure(tree_mismatch == 0, || format!("{tree_mismatch} single-tree forest predictions differ"))?;

    let mut min_eig = f64::INFINITY;
    for _ in 0..50 {
        let (n, w) = (r.gen_range(3..40), r.gen_range(8..128));
        let density = r.gen_range(0.05..0.6);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..w).map(|_| f64::from(u8::from(r.gen_bool(density)))).collect())
            .collect();
        let mut k = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                k[(a, b)] = tanimoto_kernel(&rows[a], &rows[b]).map_err(e)?;
            }
        }
        let eig = SymmetricEigen::new(k).eigenvalues;
        min_eig = min_eig.min(eig.iter().copied().fold(f64::INFINITY, f64::min));
    }
    ensure(min_eig >= -1e-8, || format!("smallest Tanimoto eigenvalue {min_eig:e}"))?;
    Ok(format!(
        "200 trees ({splits} splits) respect 20/7; ridge(0)-OLS {worst_ridge:.1e}; forest = tree; min eigenvalue {min_eig:.1e}"
    ))
}

fn load_reports(out: &Path) -> Result<BTreeMap<String, SelectionReport>, String> {
    let dir = out.join("meta").join("reports");
    let mut reports = BTreeMap::new();
    for entry in fs::read_dir(&dir).map_err(|e| format!("{}: {e}", dir.display()))? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let text = fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let report: SelectionReport = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        reports.insert(report.method.clone(), report);
    }
    Ok(reports)
}

fn full_config(out: &Path) -> RunConfig {
    RunConfig {
        output_dir: out.to_path_buf(),
        ..RunConfig::default()
    }
}

fn criterion_8(out: &Path) -> Outcome {
    let config = full_config(out);
    let started = Instant::now();
    let outcomes = run_pipeline(&config, true).map_err(|e| e.to_string())?;
    let secs = started.elapsed().as_secs_f64();
    ensure(outcomes.iter().all(|o| !o.partial), || "a stage finished partially".into())?;
    let reports = load_reports(out)?;
    let get = |id: &str| reports.get(id).ok_or_else(|| format!("no report for {id}"));
    let n_targets = get("cl.All")?.selections.len();
    let n_strategies = config.strategies.len();
    ensure(n_targets == 200 && n_strategies >= 6, || {
        format!("{n_targets} targets, {n_strategies} strategies")
    })?;

    let all = get("cl.All")?;
    let lift = all.accuracy - all.baseline_accuracy;
    ensure(lift >= 0.15, || {
        format!("(a) accuracy {:.3} vs baseline {:.3}", all.accuracy, all.baseline_accuracy)
    })?;

    let default_rmse = get("default")?.mean_realized_rmse;
    for id in ["mvrf", "knn.50"] {
        let r = get(id)?;
        ensure(r.mean_realized_rmse < default_rmse, || {
            format!("(b) {id} RMSE {:.4} vs default {default_rmse:.4}", r.mean_realized_rmse)
        })?;
    }

    let (mv, sh) = (get("mvrf")?, get("mvrf.shuffled")?);
    let (rs, rs_shuffled) = (mv.mean_spearman.unwrap_or(f64::NAN), sh.mean_spearman.unwrap_or(f64::NAN));
    let paired = wilcoxon_signed_rank(&mv.fold_spearman, &sh.fold_spearman).map_err(|e| e.to_string())?;
    ensure(rs > rs_shuffled && paired.statistic > 0.0 && paired.p_value < 0.05, || {
        format!("(c) rs {rs:.3} vs shuffled {rs_shuffled:.3}, paired p = {:.4}", paired.p_value)
    })?;

    let mut curve = vec![("cl.All".to_string(), all.accuracy)];
    for k in (2..n_strategies).rev() {
        let id = format!("cl.Top{k}");
        curve.push((id.clone(), get(&id)?.accuracy));
    }
    let monotone = curve.windows(2).all(|w| w[1].1 >= w[0].1);
    let shown: Vec<String> = curve.iter().map(|(id, a)| format!("{id} {a:.3}")).collect();
    ensure(monotone, || format!("(d) accuracy curve {}", shown.join(", ")))?;
    ensure(secs < 600.0, || format!("pipeline took {secs:.0}s"))?;
    Ok(format!(
        "(a) {:.3} vs {:.3}; (b) mvrf {:.3}, knn.50 {:.3} < default {default_rmse:.3}; \
         (c) rs {rs:.3} vs {rs_shuffled:.3}, p = {:.4}; (d) {}; {secs:.0}s",
        all.accuracy,
        all.baseline_accuracy,
        mv.mean_realized_rmse,
        get("knn.50")?.mean_realized_rmse,
        paired.p_value,
        shown.join(" <= "),
    ))
}

/// CSV and JSON artifacts, relative to `root`; the manifest (timings) and
/// the checkpoint (completion order) are excluded.
fn artifacts(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).into_iter().flatten().flatten() {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
            if matches!(ext, "csv" | "json") && name != MANIFEST_FILE {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn criterion_9(first: &Path, second: &Path) -> Outcome {
    run_pipeline(&full_config(second), true).map_err(|e| e.to_string())?;
    let (a, b) = (artifacts(first), artifacts(second));
    ensure(!a.is_empty() && a == b, || format!("file sets differ: {} vs {}", a.len(), b.len()))?;
    let differing: Vec<String> = a
        .iter()
        .filter(|rel| fs::read(first.join(rel)).ok() != fs::read(second.join(rel)).ok())
        .map(|rel| rel.display().to_string())
        .collect();
    ensure(differing.is_empty(), || format!("bytes differ in {}", differing.join(", ")))?;
    let csv = a.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")).count();
    Ok(format!("{} artifacts ({csv} CSV) byte-identical across reruns", a.len()))
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let (first, second) = (tmp.path().join("first"), tmp.path().join("second"));
    let criteria: Vec<(u32, Box<dyn Fn() -> Outcome>)> = vec![
        (1, Box::new(criterion_1)),
        (2, Box::new(criterion_2)),
        (3, Box::new(criterion_3)),
        (4, Box::new(criterion_4)),
        (5, Box::new(criterion_5)),
        (6, Box::new(criterion_6)),
        (7, Box::new(criterion_7)),
        (8, Box::new(|| criterion_8(&first))),
        (9, Box::new(|| criterion_9(&first, &second))),
    ];
    let mut failed = 0;
    for (n, run) in &criteria {
        let started = Instant::now();
        let outcome = run();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL ({secs:.1}s) {detail}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
