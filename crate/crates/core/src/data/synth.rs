//! Seeded synthetic corpus with a planted selection rule.
//!
//! Each target is assigned a response [`Regime`] that favours a different
//! learner × representation pairing. The regime also shapes the protein:
//! its residue composition and (with probability `family_fidelity`) its
//! L1 class, so the best strategy is predictable from meta-features.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ProteinTarget, Representation, TargetRecord, AMINO_ACIDS};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed::derive_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Activity linear in the basic descriptors.
    Linear,
    /// Threshold interactions of descriptors only present in `allmolprop`.
    DescriptorInteraction,
    /// Sparse additive contributions of fingerprint bits.
    FingerprintAdditive,
    /// Smooth function of Tanimoto similarity to scaffold prototypes.
    FingerprintSimilarity,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::Linear,
        Regime::DescriptorInteraction,
        Regime::FingerprintAdditive,
        Regime::FingerprintSimilarity,
    ];

    pub fn family(self) -> &'static str {
        match self {
            Regime::Linear => "Enzyme",
            Regime::DescriptorInteraction => "Membrane receptor",
            Regime::FingerprintAdditive => "Ion channel",
            Regime::FingerprintSimilarity => "Transporter",
        }
    }

    /// Strategies expected to do well under this regime.
    pub fn favors(self) -> &'static str {
        match self {
            Regime::Linear => "lm.basicmolprop",
            Regime::DescriptorInteraction => "rforest.allmolprop",
            Regime::FingerprintAdditive => "ridge.fpFCFP4",
            Regime::FingerprintSimilarity => "ksvmfp.fpFCFP4",
        }
    }

    /// Meta-features whose values are shifted by this regime.
    pub fn driving_features(self) -> &'static [&'static str] {
        match self {
            Regime::Linear => &["aliphatic_index"],
            Regime::DescriptorInteraction => &["hydrophobicity_kyte_doolittle"],
            Regime::FingerprintAdditive => &["net_charge", "isoelectric_point"],
            Regime::FingerprintSimilarity => &["net_charge", "isoelectric_point"],
        }
    }

    fn enriched_residues(self) -> &'static [u8] {
        match self {
            Regime::Linear => b"AVIL",
            Regime::DescriptorInteraction => b"FWYM",
            Regime::FingerprintAdditive => b"KRH",
            Regime::FingerprintSimilarity => b"DE",
        }
    }

    fn subfamilies(self) -> &'static [&'static str] {
        match self {
            Regime::Linear => &["Kinase", "Protease", "Oxidoreductase"],
            Regime::DescriptorInteraction => &["Family A GPCR", "Nuclear receptor"],
            Regime::FingerprintAdditive => &["Voltage-gated channel", "Ligand-gated channel"],
            Regime::FingerprintSimilarity => &["SLC transporter", "ABC transporter"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSpec {
    pub n_targets: usize,
    pub compounds_min: usize,
    pub compounds_max: usize,
    pub basic_width: usize,
    pub all_width: usize,
    pub fp_width: usize,
    /// Fraction of descriptor cells blanked out (fingerprints stay complete).
    pub missing_rate: f64,
    /// Noise standard deviation relative to the unit-variance signal.
    pub noise: f64,
    pub sequence_min: usize,
    pub sequence_max: usize,
    /// Relative weights of the planted regimes.
    pub regimes: BTreeMap<Regime, f64>,
    /// Probability that a target's L1 class matches its regime's family.
    pub family_fidelity: f64,
    /// Weight of the regime-specific residues in the sequence composition.
    pub composition_bias: f64,
    /// Share of descriptor variance explained by the compound's scaffold, so
    /// descriptors and fingerprints describe the same molecules.
    pub scaffold_coupling: f64,
    /// Weight of the basic-descriptor main effect under the interaction
    /// regime, relative to the unit-scale interaction terms.
    pub interaction_main_effect: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_targets: 200,
            compounds_min: 30,
            compounds_max: 80,
            basic_width: 8,
            all_width: 24,
            fp_width: 64,
            missing_rate: 0.02,
            noise: 0.25,
            sequence_min: 120,
            sequence_max: 300,
            regimes: Regime::ALL.iter().map(|&r| (r, 1.0)).collect(),
            family_fidelity: 0.9,
            composition_bias: 0.35,
            scaffold_coupling: 0.3,
            interaction_main_effect: 0.7,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InfeasibleSpec(m.to_string()));
        if self.compounds_min < 2 {
            return bad("compounds per target must be at least 2");
        }
        if self.compounds_max < self.compounds_min {
            return bad("compounds_max < compounds_min");
        }
        if self.basic_width < 2 {
            return bad("basic_width must be at least 2");
        }
        if self.all_width < self.basic_width + 3 {
            return bad("all_width must exceed basic_width by at least 3");
        }
        if self.fp_width < 8 {
            return bad("fp_width must be at least 8");
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return bad("missing_rate must lie in [0, 1)");
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad("noise must be a non-negative finite number");
        }
        if self.sequence_min < 2 || self.sequence_max < self.sequence_min {
            return bad("sequence length range must satisfy 2 <= min <= max");
        }
        if !(0.0..=1.0).contains(&self.family_fidelity)
            || !(0.0..=1.0).contains(&self.composition_bias)
            || !(0.0..=1.0).contains(&self.scaffold_coupling)
        {
            return bad("family_fidelity, composition_bias and scaffold_coupling must lie in [0, 1]");
        }
        if !(self.interaction_main_effect >= 0.0 && self.interaction_main_effect.is_finite()) {
            return bad("interaction_main_effect must be a non-negative finite number");
        }
        if self.regimes.values().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return bad("regime weights must be non-negative");
        }
        if self.n_targets > 0 && self.regimes.values().sum::<f64>() <= 0.0 {
            return bad("at least one regime needs positive weight");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub target_id: String,
    pub regime: Regime,
    pub family: String,
    pub favors: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub targets: Vec<TargetRecord>,
    pub truth: Vec<GroundTruth>,
}

impl SynthCorpus {
    pub fn proteins(&self) -> Vec<ProteinTarget> {
        self.targets.iter().map(|t| t.protein.clone()).collect()
    }
}

pub fn generate_synthetic_corpus(spec: &SynthSpec, seed: u64) -> Result<SynthCorpus> {
    spec.validate()?;
    let regimes: Vec<(Regime, f64)> = spec
        .regimes
        .iter()
        .filter(|(_, w)| **w > 0.0)
        .map(|(r, w)| (*r, *w))
        .collect();
    let mut targets = Vec::with_capacity(spec.n_targets);
    let mut truth = Vec::with_capacity(spec.n_targets);
    for t in 0..spec.n_targets {
        let target_id = format!("T{t:04}");
        let mut rng = derive_rng(seed, &["synth", &target_id]);
        let regime = regimes
            .choose_weighted(&mut rng, |(_, w)| *w)
            .expect("positive weights")
            .0;
        let (record, family) = generate_target(spec, &target_id, regime, &mut rng)?;
        truth.push(GroundTruth {
            target_id: target_id.clone(),
            regime,
            family,
            favors: regime.favors().to_string(),
        });
        targets.push(record);
    }
    Ok(SynthCorpus { targets, truth })
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn tanimoto(a: &[f64], b: &[f64]) -> f64 {
    let (mut inter, mut union) = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        if x > 0.5 && y > 0.5 {
            inter += 1.0;
        }
        if x > 0.5 || y > 0.5 {
            union += 1.0;
        }
    }
    if union == 0.0 {
        1.0
    } else {
        inter / union
    }
}

fn standardize(values: &mut [f64]) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    for v in values.iter_mut() {
        *v = if sd > 1e-12 { (*v - mean) / sd } else { 0.0 };
    }
}

fn generate_target(
    spec: &SynthSpec,
    target_id: &str,
    regime: Regime,
    rng: &mut ChaCha8Rng,
) -> Result<(TargetRecord, String)> {
    let n = rng.gen_range(spec.compounds_min..=spec.compounds_max);
    let (wb, wa, wf) = (spec.basic_width, spec.all_width, spec.fp_width);

    // fingerprints: noisy copies of a handful of scaffold prototypes
    let n_scaffolds = rng.gen_range(3..=6);
    let protos: Vec<Vec<f64>> = (0..n_scaffolds)
        .map(|_| {
            (0..wf)
                .map(|_| if rng.gen_bool(0.2) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let mut fp = Matrix::zeros(n, wf);
    let mut scaffold = vec![0; n];
    for r in 0..n {
        let s = rng.gen_range(0..n_scaffolds);
        scaffold[r] = s;
        for c in 0..wf {
            let bit = protos[s][c] > 0.5;
            let flip = rng.gen_bool(0.1);
            fp.set(r, c, if bit != flip { 1.0 } else { 0.0 });
        }
    }

    // basic descriptors: a size-like column tied to the fingerprint plus
    // independent columns with random location and scale
    // unit-variance latent = shared scaffold profile + compound-specific part
    let (share, own) = (spec.scaffold_coupling.sqrt(), (1.0 - spec.scaffold_coupling).sqrt());
    let profiles: Vec<Vec<f64>> = (0..n_scaffolds)
        .map(|_| (0..wb + 3).map(|_| normal(rng)).collect())
        .collect();
    let latent = |r: usize, c: usize, rng: &mut ChaCha8Rng| {
        share * profiles[scaffold[r]][c] + own * normal(rng)
    };
    let offsets: Vec<f64> = (0..wb).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let scales: Vec<f64> = (0..wb).map(|_| rng.gen_range(0.5..3.0)).collect();
    let mut all = Matrix::zeros(n, wa);
    for r in 0..n {
        let bits: f64 = fp.row(r).iter().sum();
        all.set(r, 0, 10.0 * bits / wf as f64 + 0.5 * normal(rng));
        for c in 1..wb {
            all.set(r, c, offsets[c] + scales[c] * latent(r, c, rng));
        }
    }
    // extended descriptors: three independent interaction drivers, then
    // nonlinear transforms of basic columns, then noise
    for r in 0..n {
        for c in wb..wa {
            let k = c - wb;
            let v = if k < 3 {
                latent(r, wb + k, rng)
            } else if k % 2 == 1 {
                let a = all.get(r, k % wb);
                let b = all.get(r, (k + 1) % wb);
                a * b / 10.0 + 0.1 * normal(rng)
            } else {
                normal(rng) * 2.0
            };
            all.set(r, c, v);
        }
    }

    let linear_part = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let beta: Vec<f64> = (0..wb).map(|_| normal(rng)).collect();
        let mut cols: Vec<Vec<f64>> = (0..wb).map(|c| all.column(c)).collect();
        cols.iter_mut().for_each(|c| standardize(c));
        let mut v: Vec<f64> = (0..n)
            .map(|r| (0..wb).map(|c| beta[c] * cols[c][r]).sum())
            .collect();
        standardize(&mut v);
        v
    };
    let mut signal: Vec<f64> = match regime {
        Regime::Linear => linear_part(rng),
        Regime::DescriptorInteraction => {
            // interactions sit on top of weaker basic-descriptor main effects
            let main = linear_part(rng);
            (0..n)
                .map(|r| {
                    let (e1, e2, e3) = (all.get(r, wb), all.get(r, wb + 1), all.get(r, wb + 2));
                    let a = if e1 > 0.0 && e2 > 0.0 { 2.0 } else { 0.0 };
                    let b = if e3 > 0.3 { 1.0 } else { 0.0 };
                    a + b + spec.interaction_main_effect * main[r]
                })
                .collect()
        }
        Regime::FingerprintAdditive => {
            let weights: Vec<f64> = (0..wf)
                .map(|_| if rng.gen_bool(0.3) { normal(rng) } else { 0.0 })
                .collect();
            (0..n)
                .map(|r| fp.row(r).iter().zip(&weights).map(|(x, w)| x * w).sum())
                .collect()
        }
        Regime::FingerprintSimilarity => {
            let amps: Vec<f64> = (0..n_scaffolds).map(|_| 2.0 * normal(rng)).collect();
            (0..n)
                .map(|r| {
                    protos
                        .iter()
                        .zip(&amps)
                        .map(|(p, a)| a * tanimoto(fp.row(r), p).powi(2))
                        .sum()
                })
                .collect()
        }
    };
    standardize(&mut signal);
    let center = rng.gen_range(4.0..8.0);
    let scale = rng.gen_range(0.5..1.5);
    let activity: Vec<f64> = signal
        .iter()
        .map(|s| center + scale * (s + spec.noise * normal(rng)))
        .collect();

    // missing cells shared between the basic columns and their copies
    let mut missing_all = vec![false; n * wa];
    for r in 0..n {
        for c in 0..wa {
            if rng.gen_bool(spec.missing_rate) {
                missing_all[r * wa + c] = true;
                all.set(r, c, f64::NAN);
            }
        }
    }
    let basic_cols: Vec<usize> = (0..wb).collect();
    let basic = all.select_cols(&basic_cols);
    let missing_basic: Vec<bool> = (0..n)
        .flat_map(|r| (0..wb).map(move |c| (r, c)))
        .map(|(r, c)| missing_all[r * wa + c])
        .collect();

    let basic_names: Vec<String> = (0..wb).map(|c| format!("basic_{c}")).collect();
    let mut all_names = basic_names.clone();
    all_names.extend((wb..wa).map(|c| format!("desc_{c}")));
    let fp_names: Vec<String> = (0..wf).map(|c| format!("fp_{c}")).collect();

    let mut datasets = BTreeMap::new();
    datasets.insert(
        Representation::BasicMolProp,
        Dataset::new(
            target_id,
            Representation::BasicMolProp,
            basic_names,
            basic,
            missing_basic,
            activity.clone(),
        )?,
    );
    datasets.insert(
        Representation::AllMolProp,
        Dataset::new(
            target_id,
            Representation::AllMolProp,
            all_names,
            all,
            missing_all,
            activity.clone(),
        )?,
    );
    datasets.insert(
        Representation::FingerprintFcfp4,
        Dataset::complete(
            target_id,
            Representation::FingerprintFcfp4,
            fp_names,
            fp,
            activity,
        )?,
    );

    let (protein, family) = generate_protein(spec, target_id, regime, rng)?;
    Ok((
        TargetRecord {
            target_id: target_id.to_string(),
            datasets,
            protein,
        },
        family,
    ))
}

fn generate_protein(
    spec: &SynthSpec,
    target_id: &str,
    regime: Regime,
    rng: &mut ChaCha8Rng,
) -> Result<(ProteinTarget, String)> {
    let len = rng.gen_range(spec.sequence_min..=spec.sequence_max);
    let enriched = regime.enriched_residues();
    let sequence: String = (0..len)
        .map(|_| {
            let code = if rng.gen_bool(spec.composition_bias) {
                *enriched.choose(rng).expect("non-empty")
            } else {
                *AMINO_ACIDS.choose(rng).expect("non-empty")
            };
            code as char
        })
        .collect();

    let labelled = if rng.gen_bool(spec.family_fidelity) {
        regime
    } else {
        *Regime::ALL.choose(rng).expect("non-empty")
    };
    let l1 = labelled.family().to_string();
    let l2 = labelled
        .subfamilies()
        .choose(rng)
        .expect("non-empty")
        .to_string();
    let l3 = format!("{l2} group {}", rng.gen_range(0..3));
    let l4 = if rng.gen_bool(0.5) {
        format!("{l3} subgroup {}", rng.gen_range(0..2))
    } else {
        String::new()
    };
    let preferred = format!("{l2} protein {}", rng.gen_range(0..8));
    let levels = [l1.clone(), l2, l3, l4, String::new(), String::new()];
    let protein = ProteinTarget::new(target_id, sequence)?.with_groups(levels, preferred);
    Ok((protein, l1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthSpec {
        SynthSpec {
            n_targets: 5,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = generate_synthetic_corpus(&small(), 7).unwrap();
        let b = generate_synthetic_corpus(&small(), 7).unwrap();
        // NaN != NaN, so compare the serialized form
        let dump = |c: &SynthCorpus| format!("{:?}", c);
        assert_eq!(dump(&a), dump(&b));
        let c = generate_synthetic_corpus(&small(), 8).unwrap();
        assert_ne!(dump(&a), dump(&c));
    }

    #[test]
    fn empty_and_infeasible() {
        let spec = SynthSpec {
            n_targets: 0,
            ..SynthSpec::default()
        };
        assert!(generate_synthetic_corpus(&spec, 1).unwrap().targets.is_empty());
        let spec = SynthSpec {
            compounds_min: 1,
            ..SynthSpec::default()
        };
        assert!(matches!(
            generate_synthetic_corpus(&spec, 1),
            Err(Error::InfeasibleSpec(_))
        ));
    }

    #[test]
    fn layout_matches_representations() {
        let spec = small();
        let corpus = generate_synthetic_corpus(&spec, 3).unwrap();
        for t in &corpus.targets {
            assert_eq!(t.datasets.len(), 3);
            let basic = &t.datasets[&Representation::BasicMolProp];
            let all = &t.datasets[&Representation::AllMolProp];
            let fp = &t.datasets[&Representation::FingerprintFcfp4];
            assert_eq!(basic.n_features(), spec.basic_width);
            assert_eq!(all.n_features(), spec.all_width);
            assert_eq!(fp.n_features(), spec.fp_width);
            assert!(!fp.has_missing());
            assert_eq!(basic.activity(), fp.activity());
            assert!((spec.compounds_min..=spec.compounds_max).contains(&basic.n_rows()));
            assert!(t.protein.sequence().len() >= spec.sequence_min);
        }
    }
}
