//! Sequence-derived target descriptors. Per-residue tables are indexed in
//! the order of [`AMINO_ACIDS`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{amino_acid_index, validate_sequence, AMINO_ACIDS};
use crate::error::{Error, Result};

type Table = [f64; 20];

const WATER_MASS: f64 = 18.01528;

/// Average masses of the free amino acids.
const AVERAGE_MASS: Table = [
    89.0932, 121.1582, 133.1027, 147.1293, 165.1891, 75.0666, 155.1546, 131.1729, 146.1876,
    131.1729, 149.2113, 132.1179, 115.1305, 146.1445, 174.201, 105.0926, 119.1192, 117.1463,
    204.2252, 181.1885,
];

/// Boman solubility values, signed so that the index is their plain mean.
const BOMAN: Table = [
    -1.81, -1.28, 8.72, 6.81, -2.98, -0.94, 4.66, -4.92, 5.55, -4.92, -2.35, 6.64, 0.0, 5.54,
    14.92, 3.40, 2.57, -4.04, -2.33, 0.14,
];

/// Dipeptide instability weights; row is the first residue of the pair.
#[rustfmt::skip]
const DIWV: [Table; 20] = [
    [1.0, 44.94, -7.49, 1.0, 1.0, 1.0, -7.49, 1.0, 1.0, 1.0, 1.0, 1.0, 20.26, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
    [1.0, 1.0, 20.26, 1.0, 1.0, 1.0, 33.6, 1.0, 1.0, 20.26, 33.6, 1.0, 20.26, -6.54, 1.0, 1.0, 33.6, -6.54, 24.68, 1.0],
    [1.0, 1.0, 1.0, 1.0, -6.54, 1.0, 1.0, 1.0, -7.49, 1.0, 1.0, 1.0, 1.0, 1.0, -6.54, 20.26, -14.03, 1.0, 1.0, 1.0],
    [1.0, 44.94, 20.26, 33.6, 1.0, 1.0, -6.54, 20.26, 1.0, 1.0, 1.0, 1.0, 20.26, 20.26, 1.0, 20.26, 1.0, 1.0, -14.03, 1.0],
    [1.0, 1.0, 13.34, 1.0, 1.0, 1.0, 1.0, 1.0, -14.03, 1.0, 1.0, 1.0, 20.26, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 33.601],
    [-7.49, 1.0, 1.0, -6.54, 1.0, 13.34, 1.0, -7.49, -7.49, 1.0, 1.0, -7.49, 1.0, 1.0, 1.0, 1.0, -7.49, 1.0, 13.34, -7.49],
    [1.0, 1.0, 1.0, 1.0, -9.37, -9.37, 1.0, 44.94, 24.68, 1.0, 1.0, 24.68, -1.88, 1.0, 1.0, 1.0, -6.54, 1.0, -1.88, 44.94],
    [1.0, 1.0, 1.0, 44.94, 1.0, 1.0, 13.34, 1.0, -7.49, 20.26, 1.0, 1.0, -1.88, 1.0, 1.0, 1.0, 1.0, -7.49, 1.0, 1.0],
    [1.0, 1.0, 1.0, 1.0, 1.0, -7.49, 1.0, -7.49, 1.0, -7.49, 33.6, 1.0, -6.54, 24.64, 33.6, 1.0, 1.0, -7.49, 1.0, 1.0],
    [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, -7.49, 1.0, 1.0, 1.0, 20.26, 33.6, 20.26, 1.0, 1.0, 1.0, 24.68, 1.0],
    [13.34, 1.0, 1.0, 1.0, 1.0, 1.0, 58.28, 1.0, 1.0, 1.0, -1.88, 1.0, 44.94, -6.54, -6.54, 44.94, -1.88, 1.0, 1.0, 24.68],
    [1.0, -1.88, 1.0, 1.0, -14.03, -14.03, 1.0, 44.94, 24.68, 1.0, 1.0, 1.0, -1.88, -6.54, 1.0, 1.0, -7.49, 1.0, -9.37, 1.0],
    [20.26, -6.54, -6.54, 18.38, 20.26, 1.0, 1.0, 1.0, 1.0, 1.0, -6.54, 1.0, 20.26, 20.26, -6.54, 20.26, 1.0, 20.26, -1.88, 1.0],
    [1.0, -6.54, 20.26, 20.26, -6.54, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 20.26, 20.26, 1.0, 44.94, 1.0, -6.54, 1.0, -6.54],
    [1.0, 1.0, 1.0, 1.0, 1.0, -7.49, 20.26, 1.0, 1.0, 1.0, 1.0, 13.34, 20.26, 20.26, 58.28, 44.94, 1.0, 1.0, 58.28, -6.54],
    [1.0, 33.6, 1.0, 20.26, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 44.94, 20.26, 20.26, 20.26, 1.0, 1.0, 1.0, 1.0],
    [1.0, 1.0, 1.0, 20.26, 13.34, -7.49, 1.0, 1.0, 1.0, 1.0, 1.0, -14.03, 1.0, -6.54, 1.0, 1.0, 1.0, 1.0, -14.03, 1.0],
    [1.0, 1.0, -14.03, 1.0, 1.0, -7.49, 1.0, 1.0, -1.88, 1.0, 1.0, 1.0, 20.26, 1.0, 1.0, 1.0, -7.49, 1.0, 1.0, -6.54],
    [-14.03, 1.0, 1.0, 1.0, 1.0, -9.37, 24.68, 1.0, 1.0, 13.34, 24.68, 13.34, 1.0, 1.0, 1.0, 1.0, -14.03, -7.49, 1.0, 1.0],
    [24.68, 1.0, 24.68, -6.54, 1.0, -7.49, 13.34, 1.0, 1.0, 1.0, 44.94, 1.0, 13.34, 1.0, -15.91, 1.0, -7.49, 1.0, -9.37, 13.34],
];

/// A per-residue hydrophobicity scale.
#[derive(Debug, Clone, PartialEq)]
pub struct HydrophobicityScale {
    pub name: &'static str,
    pub values: Table,
}

impl HydrophobicityScale {
    pub fn value(&self, residue: u8) -> Option<f64> {
        amino_acid_index(residue).map(|i| self.values[i])
    }
}

pub const SCALES: [HydrophobicityScale; 5] = [
    HydrophobicityScale {
        name: "kyte_doolittle",
        values: [
            1.8, 2.5, -3.5, -3.5, 2.8, -0.4, -3.2, 4.5, -3.9, 3.8, 1.9, -3.5, -1.6, -3.5, -4.5,
            -0.8, -0.7, 4.2, -0.9, -1.3,
        ],
    },
    HydrophobicityScale {
        name: "hopp_woods",
        values: [
            -0.5, -1.0, 3.0, 3.0, -2.5, 0.0, -0.5, -1.8, 3.0, -1.8, -1.3, 0.2, 0.0, 0.2, 3.0, 0.3,
            -0.4, -1.5, -3.4, -2.3,
        ],
    },
    HydrophobicityScale {
        name: "eisenberg",
        values: [
            0.62, 0.29, -0.9, -0.74, 1.19, 0.48, -0.4, 1.38, -1.5, 1.06, 0.64, -0.78, 0.12, -0.85,
            -2.53, -0.18, -0.05, 1.08, 0.81, 0.26,
        ],
    },
    HydrophobicityScale {
        name: "janin",
        values: [
            0.28, 0.97, -0.52, -1.01, 0.46, 0.43, -0.31, 0.60, -1.62, 0.60, 0.43, -0.55, -0.42,
            -0.69, -1.14, -0.19, -0.32, 0.60, 0.29, -0.15,
        ],
    },
    HydrophobicityScale {
        name: "engelman",
        values: [
            -1.6, -2.0, 9.2, 8.2, -3.7, -1.0, 3.0, -3.1, 8.8, -2.8, -3.4, 4.8, 0.2, 4.1, 12.3,
            -0.6, -1.2, -2.6, -1.9, 0.7,
        ],
    },
];

pub fn hydrophobicity_scale(name: &str) -> Result<&'static HydrophobicityScale> {
    SCALES
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScale(name.to_string()))
}

/// Ionizable-group pKa values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PkaSet {
    #[default]
    Lehninger,
    Emboss,
}

struct Pka {
    n_term: f64,
    c_term: f64,
    /// K, R, H
    basic: [(u8, f64); 3],
    /// D, E, C, Y
    acidic: [(u8, f64); 4],
}

impl PkaSet {
    fn values(self) -> Pka {
        match self {
            PkaSet::Lehninger => Pka {
                n_term: 9.69,
                c_term: 2.34,
                basic: [(b'K', 10.5), (b'R', 12.4), (b'H', 6.0)],
                acidic: [(b'D', 3.86), (b'E', 4.25), (b'C', 8.33), (b'Y', 10.0)],
            },
            PkaSet::Emboss => Pka {
                n_term: 8.6,
                c_term: 3.6,
                basic: [(b'K', 10.8), (b'R', 12.5), (b'H', 6.5)],
                acidic: [(b'D', 3.9), (b'E', 4.1), (b'C', 8.5), (b'Y', 10.1)],
            },
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            PkaSet::Lehninger => "lehninger",
            PkaSet::Emboss => "emboss",
        }
    }
}

impl fmt::Display for PkaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for PkaSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [PkaSet::Lehninger, PkaSet::Emboss]
            .into_iter()
            .find(|p| p.token() == s)
            .ok_or_else(|| Error::UnknownPkaSet(s.to_string()))
    }
}

fn counts(seq: &str) -> [usize; 20] {
    let mut c = [0usize; 20];
    for b in seq.bytes() {
        c[amino_acid_index(b).expect("validated sequence")] += 1;
    }
    c
}

fn count_of(c: &[usize; 20], residue: u8) -> f64 {
    c[amino_acid_index(residue).expect("canonical residue")] as f64
}

fn table_mean(seq: &str, table: &Table) -> Result<f64> {
    validate_sequence(seq)?;
    let sum: f64 = seq
        .bytes()
        .map(|b| table[amino_acid_index(b).expect("validated")])
        .sum();
    Ok(sum / seq.len() as f64)
}

/// `X(A) + 2.9 X(V) + 3.9 (X(I) + X(L))`, with `X` in mole percent.
pub fn aliphatic_index(seq: &str) -> Result<f64> {
    validate_sequence(seq)?;
    let c = counts(seq);
    let pct = |r: u8| 100.0 * count_of(&c, r) / seq.len() as f64;
    Ok(pct(b'A') + 2.9 * pct(b'V') + 3.9 * (pct(b'I') + pct(b'L')))
}

pub fn boman_index(seq: &str) -> Result<f64> {
    table_mean(seq, &BOMAN)
}

pub fn hydrophobicity(seq: &str, scale: &str) -> Result<f64> {
    table_mean(seq, &hydrophobicity_scale(scale)?.values)
}

fn charge_unchecked(c: &[usize; 20], ph: f64, pka: &Pka) -> f64 {
    let pos = |pk: f64| 1.0 / (1.0 + 10f64.powf(ph - pk));
    let neg = |pk: f64| 1.0 / (1.0 + 10f64.powf(pk - ph));
    let mut charge = pos(pka.n_term) - neg(pka.c_term);
    for &(r, pk) in &pka.basic {
        charge += count_of(c, r) * pos(pk);
    }
    for &(r, pk) in &pka.acidic {
        charge -= count_of(c, r) * neg(pk);
    }
    charge
}

/// Henderson–Hasselbalch net charge at `ph`.
pub fn net_charge(seq: &str, ph: f64, pka: PkaSet) -> Result<f64> {
    validate_sequence(seq)?;
    if !(ph > 0.0 && ph < 14.0) {
        return Err(Error::PhOutOfRange(ph));
    }
    Ok(charge_unchecked(&counts(seq), ph, &pka.values()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoelectricPoint {
    pub ph: f64,
    /// False when the charge keeps one sign over the whole range and `ph`
    /// is the boundary value.
    pub crossed: bool,
}

/// Bisection for the zero of the (monotone decreasing) net charge.
pub fn isoelectric_point(seq: &str, pka: PkaSet) -> Result<IsoelectricPoint> {
    validate_sequence(seq)?;
    let c = counts(seq);
    let p = pka.values();
    let (mut lo, mut hi) = (1e-6, 14.0 - 1e-6);
    if charge_unchecked(&c, lo, &p) <= 0.0 {
        return Ok(IsoelectricPoint { ph: lo, crossed: false });
    }
    if charge_unchecked(&c, hi, &p) >= 0.0 {
        return Ok(IsoelectricPoint { ph: hi, crossed: false });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let q = charge_unchecked(&c, mid, &p);
        if q.abs() < 1e-9 || hi - lo < 1e-12 {
            return Ok(IsoelectricPoint { ph: mid, crossed: true });
        }
        if q > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(IsoelectricPoint {
        ph: 0.5 * (lo + hi),
        crossed: true,
    })
}

fn require_length(seq: &str, min: usize) -> Result<()> {
    validate_sequence(seq)?;
    if seq.len() < min {
        return Err(Error::SequenceTooShort {
            min,
            found: seq.len(),
        });
    }
    Ok(())
}

/// `(10 / L) Σ DIWV(s_i, s_{i+1})`.
pub fn instability_index(seq: &str) -> Result<f64> {
    require_length(seq, 2)?;
    let idx: Vec<usize> = seq.bytes().map(|b| amino_acid_index(b).unwrap()).collect();
    let sum: f64 = idx.windows(2).map(|w| DIWV[w[0]][w[1]]).sum();
    Ok(10.0 / seq.len() as f64 * sum)
}

/// Dipeptide weight lookup, `None` for non-canonical residues.
pub fn diwv(first: u8, second: u8) -> Option<f64> {
    Some(DIWV[amino_acid_index(first)?][amino_acid_index(second)?])
}

/// Frequencies of the 400 ordered adjacent pairs, row-major over
/// [`AMINO_ACIDS`] (`AA, AC, …, YY`).
pub fn dipeptide_composition(seq: &str) -> Result<Vec<f64>> {
    require_length(seq, 2)?;
    let idx: Vec<usize> = seq.bytes().map(|b| amino_acid_index(b).unwrap()).collect();
    let mut out = vec![0.0; 400];
    for w in idx.windows(2) {
        out[w[0] * 20 + w[1]] += 1.0;
    }
    let pairs = (idx.len() - 1) as f64;
    for v in &mut out {
        *v /= pairs;
    }
    Ok(out)
}

pub fn dipeptide_names() -> Vec<String> {
    let mut names = Vec::with_capacity(400);
    for &a in AMINO_ACIDS {
        for &b in AMINO_ACIDS {
            names.push(format!("dpc_{}{}", a as char, b as char));
        }
    }
    names
}

/// Residue count and average molecular weight.
pub fn sequence_scalars(seq: &str) -> Result<(usize, f64)> {
    validate_sequence(seq)?;
    let mass: f64 = seq
        .bytes()
        .map(|b| AVERAGE_MASS[amino_acid_index(b).unwrap()])
        .sum();
    Ok((seq.len(), mass - (seq.len() - 1) as f64 * WATER_MASS))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProteinOptions {
    pub pka: PkaSet,
    pub scales: Vec<String>,
    pub dipeptides: bool,
}

impl Default for ProteinOptions {
    fn default() -> Self {
        ProteinOptions {
            pka: PkaSet::default(),
            scales: SCALES.iter().map(|s| s.name.to_string()).collect(),
            dipeptides: true,
        }
    }
}

/// All protein descriptors in a fixed order.
pub fn protein_descriptors(seq: &str, opts: &ProteinOptions) -> Result<Vec<(String, f64)>> {
    let (length, mw) = sequence_scalars(seq)?;
    let pi = isoelectric_point(seq, opts.pka)?;
    let mut out = vec![
        ("length".to_string(), length as f64),
        ("molecular_weight".to_string(), mw),
        ("aliphatic_index".to_string(), aliphatic_index(seq)?),
        ("boman_index".to_string(), boman_index(seq)?),
        ("net_charge_ph7".to_string(), net_charge(seq, 7.0, opts.pka)?),
        ("isoelectric_point".to_string(), pi.ph),
    ];
    // length-1 sequences have no adjacent pair
    let pairwise = seq.len() >= 2;
    out.push((
        "instability_index".to_string(),
        if pairwise { instability_index(seq)? } else { 0.0 },
    ));
    for scale in &opts.scales {
        out.push((format!("hydrophobicity_{scale}"), hydrophobicity(seq, scale)?));
    }
    if opts.dipeptides {
        let dpc = if pairwise {
            dipeptide_composition(seq)?
        } else {
            vec![0.0; 400]
        };
        out.extend(dipeptide_names().into_iter().zip(dpc));
    }
    Ok(out)
}
