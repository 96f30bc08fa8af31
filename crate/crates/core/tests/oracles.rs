//! Hand-computed reference values checked against independent oracles.

use std::collections::HashMap;
use std::hash::Hash;

use metaqsar_core::data::ProteinTarget;
use metaqsar_core::matrix::Matrix;
use metaqsar_core::metafeatures::{
    encode_groupings, entropy_codes, entropy_normalized, hydrophobicity, isoelectric_point,
    mutual_information_codes, net_charge, sequence_scalars, total_correlation_codes, GroupingVocab,
    PkaSet,
};
use metaqsar_core::metalearn::{knn_rank, Distance};
use metaqsar_core::stats::{friedman_test, nemenyi_posthoc, nemenyi_q, wilcoxon_signed_rank, NemenyiOptions};

fn entropy_of<T: Eq + Hash>(items: impl IntoIterator<Item = T>) -> f64 {
    let mut counts: HashMap<T, usize> = HashMap::new();
    let mut n = 0usize;
    for it in items {
        *counts.entry(it).or_default() += 1;
        n += 1;
    }
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

#[test]
fn two_equal_bins_out_of_ten() {
    let x = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0];
    let h = entropy_normalized(&x, 10).unwrap();
    assert!((h - 2f64.ln() / 10f64.ln()).abs() < 1e-12);
    assert!((h - 0.3010).abs() < 1e-4);
}

#[test]
fn diagonal_joint_table_has_mutual_information_ln2() {
    let x = [0, 0, 1, 1];
    assert!((mutual_information_codes(&x, &x).unwrap() - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn duplicated_column_adds_its_entropy_to_total_correlation() {
    let x1 = vec![0, 1, 2, 0, 1, 2, 0, 0, 1, 2, 2, 2];
    let x2 = vec![1, 1, 0, 0, 1, 0, 1, 1, 0, 0, 1, 0];
    let brute = |cols: &[&Vec<usize>]| {
        let marginal: f64 = cols.iter().map(|c| entropy_of(c.iter())).sum();
        let joint = entropy_of((0..x1.len()).map(|i| cols.iter().map(|c| c[i]).collect::<Vec<_>>()));
        marginal - joint
    };
    let tc3 = total_correlation_codes(&[x1.clone(), x2.clone(), x1.clone()]).unwrap();
    let tc2 = total_correlation_codes(&[x1.clone(), x2.clone()]).unwrap();
    assert!((tc3 - brute(&[&x1, &x2, &x1])).abs() < 1e-12);
    assert!((tc3 - (tc2 + entropy_codes(&x1))).abs() < 1e-12);
}

// Lehninger pKa values, written out independently of the library.
const N_TERM: f64 = 9.69;
const C_TERM: f64 = 2.34;
const LYS: f64 = 10.5;

fn hh_plus(ph: f64, pka: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(ph - pka))
}

fn hh_minus(ph: f64, pka: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(pka - ph))
}

#[test]
fn lysine_carries_one_net_charge_at_neutral_ph() {
    let oracle = hh_plus(7.0, N_TERM) + hh_plus(7.0, LYS) - hh_minus(7.0, C_TERM);
    let q = net_charge("K", 7.0, PkaSet::Lehninger).unwrap();
    assert!((q - oracle).abs() < 1e-12);
    assert!((q - 1.0).abs() < 0.05);
}

/// First grid pH at which the charge turns non-positive.
fn grid_pi(charge: impl Fn(f64) -> f64) -> f64 {
    let mut ph = 0.001;
    while ph < 14.0 {
        if charge(ph) <= 0.0 {
            return ph;
        }
        ph += 0.001;
    }
    14.0
}

#[test]
fn isoelectric_points_match_a_grid_scan() {
    let lys = isoelectric_point("K", PkaSet::Lehninger).unwrap();
    assert!(lys.crossed && lys.ph > 9.0 && lys.ph < 11.0);
    let scan = grid_pi(|ph| hh_plus(ph, N_TERM) + hh_plus(ph, LYS) - hh_minus(ph, C_TERM));
    assert!((lys.ph - scan).abs() < 2e-3);

    let gly = isoelectric_point("GGGGGG", PkaSet::Lehninger).unwrap();
    assert!(gly.ph > C_TERM && gly.ph < N_TERM);
    let scan = grid_pi(|ph| hh_plus(ph, N_TERM) - hh_minus(ph, C_TERM));
    assert!((gly.ph - scan).abs() < 2e-3);
}

#[test]
fn free_alanine_mass() {
    let (len, mw) = sequence_scalars("A").unwrap();
    assert_eq!(len, 1);
    assert!((mw - 89.09).abs() < 0.05);
}

#[test]
fn kyte_doolittle_is_a_table_mean() {
    let kd: HashMap<char, f64> = [
        ('A', 1.8), ('R', -4.5), ('N', -3.5), ('D', -3.5), ('C', 2.5), ('Q', -3.5), ('E', -3.5),
        ('G', -0.4), ('H', -3.2), ('I', 4.5), ('L', 3.8), ('K', -3.9), ('M', 1.9), ('F', 2.8),
        ('P', -1.6), ('S', -0.8), ('T', -0.7), ('W', -0.9), ('Y', -1.3), ('V', 4.2),
    ]
    .into_iter()
    .collect();
    for seq in ["MKTAYIAKQRQISFVKSHFSRQ", "ACDEFGHIKLMNPQRSTVWY", "IIIIV"] {
        let oracle = seq.chars().map(|c| kd[&c]).sum::<f64>() / seq.len() as f64;
        assert!((hydrophobicity(seq, "kyte_doolittle").unwrap() - oracle).abs() < 1e-9, "{seq}");
    }
}

fn target(id: &str, name: &str) -> ProteinTarget {
    let levels = ["Enzyme", "Oxidoreductase", "-", "-", "-", "-"].map(String::from);
    ProteinTarget::new(id, "MKTAYIAK").unwrap().with_groups(levels, name.to_string())
}

#[test]
fn preferred_name_group_of_21_encodes_as_21() {
    let mut corpus: Vec<ProteinTarget> = (0..21).map(|i| target(&format!("d{i}"), "Dihydrofolate reductase")).collect();
    corpus.extend((0..4).map(|i| target(&format!("o{i}"), "Thrombin")));
    let vocab = GroupingVocab::build(&corpus);
    let value = |t: &ProteinTarget| {
        encode_groupings(t, &vocab)
            .into_iter()
            .find(|(n, _)| n == "preferred_name_group_size")
            .unwrap()
            .1
    };
    assert_eq!(value(&corpus[0]), 21.0);
    assert_eq!(value(&target("new", "Never seen")), 0.0);
}

#[test]
fn knn_ranking_averages_the_two_nearest_then_reranks() {
    let pool = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![10.0]]);
    let ranks = vec![vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 1.0], vec![3.0, 1.0, 2.0]];
    // nearest two to 0.4 are rows 0 and 1: mean (1.5, 2.5, 2.0)
    let got = knn_rank(&pool, &ranks, &[0.4], 2, Distance::Euclidean);
    assert_eq!(got, vec![1.0, 3.0, 2.0]);
}

#[test]
fn always_ordered_matrix_friedman_and_nemenyi() {
    let perf = Matrix::from_rows(&vec![vec![0.1, 0.2, 0.3]; 10]);
    let f = friedman_test(&perf).unwrap();
    assert!((f.statistic - 20.0).abs() < 1e-9);
    assert!(f.p_value < 1e-4);
    let nem = nemenyi_posthoc(&perf, NemenyiOptions::default()).unwrap();
    let cd = nemenyi_q(0.05, 3).unwrap() * (12.0f64 / 60.0).sqrt();
    assert!((nem.critical_difference - cd).abs() < 1e-12);
    assert!(2.0 > cd && nem.is_significant(0, 2));
}

/// Fraction of the 2^n sign patterns whose W+ is at least that observed.
fn upper_tail(n: usize, observed: usize) -> f64 {
    let hits = (0u32..1 << n)
        .filter(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).sum::<usize>() >= observed)
        .count();
    hits as f64 / (1u64 << n) as f64
}

#[test]
fn wilcoxon_all_positive_twelve() {
    let a: Vec<f64> = (1..=12).map(|i| 2.0 * i as f64).collect();
    let b: Vec<f64> = (1..=12).map(|i| i as f64).collect();
    let one_sided = upper_tail(12, 78);
    assert_eq!(one_sided, 1.0 / 4096.0);
    let r = wilcoxon_signed_rank(&a, &b).unwrap();
    assert_eq!(r.p_value, 2.0 * one_sided);
    assert_eq!(r.p_value, 2.0 / 4096.0);
}

#[test]
fn wilcoxon_exact_branch_matches_enumeration() {
    // distinct magnitudes, so W+ is a plain rank sum
    let d: [f64; 9] = [0.3, -1.2, 2.5, 0.7, -0.1, 1.9, 3.3, -2.2, 0.45];
    let b = vec![0.0; d.len()];
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].abs().total_cmp(&d[j].abs()));
    let w_plus: usize = order.iter().enumerate().filter(|(_, &i)| d[i] > 0.0).map(|(r, _)| r + 1).sum();
    let total = n * (n + 1) / 2;
    let tail = upper_tail(n, w_plus).min(upper_tail(n, total - w_plus));
    let r = wilcoxon_signed_rank(&d, &b).unwrap();
    assert!((r.p_value - (2.0 * tail).min(1.0)).abs() < 1e-15);
    assert_eq!(r.statistic, (2 * w_plus) as f64 - total as f64);
}
