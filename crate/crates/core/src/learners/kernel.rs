use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::learners::params::Hyperparams;
use crate::learners::{mean, Learner, Regressor};
use crate::matrix::Matrix;

/// Tanimoto similarity `|x ∧ y| / |x ∨ y|` of binary vectors; two all-zero
/// vectors have similarity 1.
pub fn tanimoto_kernel(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&a, &b) in x.iter().zip(y) {
        let a = binary(a)?;
        let b = binary(b)?;
        inter += usize::from(a && b);
        union += usize::from(a || b);
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

fn binary(v: f64) -> Result<bool> {
    if v == 0.0 {
        Ok(false)
    } else if v == 1.0 {
        Ok(true)
    } else {
        Err(Error::NonBinary(v))
    }
}

pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Rbf,
    Tanimoto,
}

/// Kernel ridge regression standing in for support vector regression:
/// `ksvm` (RBF on standardised features, gamma = 1/p) and `ksvmfp`
/// (Tanimoto on fingerprints).
#[derive(Debug, Clone, Copy)]
pub struct KernelRidge {
    name: &'static str,
    default_kind: Kind,
}

impl KernelRidge {
    pub fn rbf() -> Self {
        KernelRidge {
            name: "ksvm",
            default_kind: Kind::Rbf,
        }
    }

    pub fn tanimoto() -> Self {
        KernelRidge {
            name: "ksvmfp",
            default_kind: Kind::Tanimoto,
        }
    }

    fn parse(&self, params: &Hyperparams) -> Result<(Kind, f64, Option<f64>)> {
        let r = params.reader(self.name, &["kernel", "lambda", "gamma"])?;
        let default = match self.default_kind {
            Kind::Rbf => "rbf",
            Kind::Tanimoto => "tanimoto",
        };
        let kind = match r.text("kernel", default)? {
            "rbf" => Kind::Rbf,
            "tanimoto" => Kind::Tanimoto,
            other => return Err(Error::hyper(self.name, format!("unknown kernel {other:?}"))),
        };
        let lambda = r.f64_in("lambda", 0.1, 1e-12, f64::MAX)?;
        let gamma = match params.get("gamma") {
            None => None,
            Some(_) => Some(r.f64_in("gamma", 1.0, 1e-300, f64::MAX)?),
        };
        Ok((kind, lambda, gamma))
    }
}

fn bitset(row: &[f64]) -> Result<Vec<u64>> {
    let mut words = vec![0u64; row.len().div_ceil(64)];
    for (i, &v) in row.iter().enumerate() {
        if binary(v)? {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    Ok(words)
}

fn tanimoto_bits(a: &[u64], b: &[u64]) -> f64 {
    let (mut inter, mut union) = (0u32, 0u32);
    for (x, y) in a.iter().zip(b) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    if union == 0 {
        1.0
    } else {
        f64::from(inter) / f64::from(union)
    }
}

enum Support {
    Rbf {
        rows: Matrix,
        mean: Vec<f64>,
        scale: Vec<f64>,
        gamma: f64,
    },
    Tanimoto(Vec<Vec<u64>>),
}

struct FittedKernel {
    support: Support,
    alpha: Vec<f64>,
    offset: f64,
}

fn standardize_row(row: &[f64], mean: &[f64], scale: &[f64]) -> Vec<f64> {
    row.iter()
        .zip(mean.iter().zip(scale))
        .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
        .collect()
}

impl Regressor for FittedKernel {
    fn predict_row(&self, row: &[f64]) -> f64 {
        let k: Box<dyn Iterator<Item = f64> + '_> = match &self.support {
            Support::Rbf {
                rows,
                mean,
                scale,
                gamma,
            } => {
                let z = standardize_row(row, mean, scale);
                Box::new((0..rows.rows()).map(move |i| rbf_kernel(rows.row(i), &z, *gamma)))
            }
            Support::Tanimoto(bits) => {
                // non-binary query cells count as unset
                let mut q = vec![0u64; row.len().div_ceil(64)];
                for (i, &v) in row.iter().enumerate() {
                    if v == 1.0 {
                        q[i / 64] |= 1 << (i % 64);
                    }
                }
                Box::new(bits.iter().map(move |b| tanimoto_bits(b, &q)))
            }
        };
        self.offset + k.zip(&self.alpha).map(|(k, a)| k * a).sum::<f64>()
    }
}

impl Learner for KernelRidge {
    fn name(&self) -> &str {
        self.name
    }

    fn validate(&self, params: &Hyperparams) -> Result<()> {
        self.parse(params).map(|_| ())
    }

    fn binary_only(&self) -> bool {
        self.default_kind == Kind::Tanimoto
    }

    fn fit(
        &self,
        params: &Hyperparams,
        x: &Matrix,
        y: &[f64],
        _seed: u64,
    ) -> Result<Box<dyn Regressor>> {
        let (kind, lambda, gamma) = self.parse(params)?;
        let n = x.rows();
        let (support, gram) = match kind {
            Kind::Rbf => {
                let p = x.cols();
                let mean: Vec<f64> = (0..p).map(|c| crate::learners::mean(&x.column(c))).collect();
                let scale: Vec<f64> = (0..p)
                    .map(|c| {
                        let var = (0..n).map(|r| (x.get(r, c) - mean[c]).powi(2)).sum::<f64>()
                            / n as f64;
                        if var > 1e-24 {
                            var.sqrt()
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let rows: Vec<Vec<f64>> = (0..n)
                    .map(|r| standardize_row(x.row(r), &mean, &scale))
                    .collect();
                let rows = Matrix::from_rows(&rows);
                let gamma = gamma.unwrap_or(1.0 / p.max(1) as f64);
                let gram = DMatrix::from_fn(n, n, |i, j| rbf_kernel(rows.row(i), rows.row(j), gamma));
                (
                    Support::Rbf {
                        rows,
                        mean,
                        scale,
                        gamma,
                    },
                    gram,
                )
            }
            Kind::Tanimoto => {
                let bits = (0..n)
                    .map(|r| bitset(x.row(r)))
                    .collect::<Result<Vec<_>>>()?;
                let gram = DMatrix::from_fn(n, n, |i, j| tanimoto_bits(&bits[i], &bits[j]));
                (Support::Tanimoto(bits), gram)
            }
        };
        let offset = mean(y);
        let rhs = DVector::from_iterator(n, y.iter().map(|v| v - offset));
        let a = gram + DMatrix::identity(n, n) * lambda;
        let alpha = match a.clone().cholesky() {
            Some(c) => c.solve(&rhs),
            None => a
                .svd(true, true)
                .solve(&rhs, 1e-12)
                .unwrap_or_else(|_| DVector::zeros(n)),
        };
        Ok(Box::new(FittedKernel {
            support,
            alpha: alpha.iter().copied().collect(),
            offset,
        }))
    }
}
