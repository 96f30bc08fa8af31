use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::learners::params::Hyperparams;
use crate::learners::{mean, Learner, Regressor};
use crate::matrix::Matrix;

/// Jitter added to a singular normal-equation system.
const SINGULAR_JITTER: f64 = 1e-8;

/// Least squares with an optional ridge penalty (`lm`, `ridge`). Features
/// and response are centred so the intercept is not penalised.
#[derive(Debug, Clone, Copy)]
pub struct LeastSquares {
    ridge: bool,
}

impl LeastSquares {
    pub fn ols() -> Self {
        LeastSquares { ridge: false }
    }

    pub fn ridge() -> Self {
        LeastSquares { ridge: true }
    }

    fn lambda(&self, params: &Hyperparams) -> Result<f64> {
        if self.ridge {
            params
                .reader("ridge", &["lambda"])?
                .f64_in("lambda", 1.0, 0.0, f64::MAX)
        } else {
            params.reader("lm", &[])?;
            Ok(0.0)
        }
    }
}

pub(crate) struct LinearModel {
    pub intercept: f64,
    pub coef: Vec<f64>,
}

impl Regressor for LinearModel {
    fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + self.coef.iter().zip(row).map(|(b, x)| b * x).sum::<f64>()
    }
}

fn column_means(x: &Matrix) -> Vec<f64> {
    let mut m = vec![0.0; x.cols()];
    for r in 0..x.rows() {
        for (acc, v) in m.iter_mut().zip(x.row(r)) {
            *acc += v;
        }
    }
    let n = x.rows() as f64;
    m.iter_mut().for_each(|v| *v /= n);
    m
}

/// Solves `A b = rhs` for symmetric PSD `A`, jittering the diagonal when
/// the Cholesky factorisation is missing or numerically rank-deficient.
fn solve_spd(a: DMatrix<f64>, rhs: &DVector<f64>, context: &str) -> DVector<f64> {
    let max_diag = a.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let accept = |a: &DMatrix<f64>| {
        a.clone().cholesky().filter(|c| {
            let l = c.l_dirty();
            (0..l.nrows()).all(|i| l[(i, i)] * l[(i, i)] > 1e-12 * max_diag.max(1e-300))
        })
    };
    if let Some(c) = accept(&a) {
        return c.solve(rhs);
    }
    log::warn!("{context}: singular system, adding ridge jitter {SINGULAR_JITTER}");
    let n = a.nrows();
    let jittered = a + DMatrix::identity(n, n) * SINGULAR_JITTER;
    match jittered.clone().cholesky() {
        Some(c) => c.solve(rhs),
        None => jittered
            .svd(true, true)
            .solve(rhs, 1e-12)
            .unwrap_or_else(|_| DVector::zeros(n)),
    }
}

pub(crate) fn fit_ridge(x: &Matrix, y: &[f64], lambda: f64, context: &str) -> LinearModel {
    let (n, p) = (x.rows(), x.cols());
    let xm = column_means(x);
    let ym = mean(y);
    let xc = DMatrix::from_fn(n, p, |r, c| x.get(r, c) - xm[c]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - ym));
    let mut a = xc.transpose() * &xc;
    if lambda > 0.0 {
        for i in 0..p {
            a[(i, i)] += lambda;
        }
    }
    let rhs = xc.transpose() * yc;
    let beta = solve_spd(a, &rhs, context);
    let coef: Vec<f64> = beta.iter().copied().collect();
    let intercept = ym - coef.iter().zip(&xm).map(|(b, m)| b * m).sum::<f64>();
    LinearModel { intercept, coef }
}

impl Learner for LeastSquares {
    fn name(&self) -> &str {
        if self.ridge {
            "ridge"
        } else {
            "lm"
        }
    }

    fn validate(&self, params: &Hyperparams) -> Result<()> {
        self.lambda(params).map(|_| ())
    }

    fn fit(
        &self,
        params: &Hyperparams,
        x: &Matrix,
        y: &[f64],
        _seed: u64,
    ) -> Result<Box<dyn Regressor>> {
        let lambda = self.lambda(params)?;
        Ok(Box::new(fit_ridge(x, y, lambda, self.name())))
    }
}

/// Elastic net (`glmnet`) by cyclic coordinate descent on standardised
/// features. A single penalty is used: `lambda_ratio · lambda_max`, where
/// `lambda_max` is the smallest penalty that zeroes every coefficient.
#[derive(Debug, Clone, Copy, Default)]
pub struct ElasticNet;

const ENET_KEYS: &[&str] = &["alpha", "lambda", "lambda_ratio", "max_iter", "tol"];

struct EnetParams {
    alpha: f64,
    lambda: Option<f64>,
    lambda_ratio: f64,
    max_iter: usize,
    tol: f64,
}

fn enet_params(params: &Hyperparams) -> Result<EnetParams> {
    let r = params.reader("glmnet", ENET_KEYS)?;
    let lambda = match params.get("lambda") {
        None => None,
        Some(_) => Some(r.f64_in("lambda", 0.0, 0.0, f64::MAX)?),
    };
    Ok(EnetParams {
        alpha: r.f64_in("alpha", 1.0, 0.0, 1.0)?,
        lambda,
        lambda_ratio: r.f64_in("lambda_ratio", 0.05, 0.0, 1.0)?,
        max_iter: r.count("max_iter", 1000, 1)?,
        tol: r.f64_in("tol", 1e-7, 0.0, 1.0)?,
    })
}

fn soft_threshold(z: f64, g: f64) -> f64 {
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        0.0
    }
}

impl Learner for ElasticNet {
    fn name(&self) -> &str {
        "glmnet"
    }

    fn validate(&self, params: &Hyperparams) -> Result<()> {
        enet_params(params).map(|_| ())
    }

    fn fit(
        &self,
        params: &Hyperparams,
        x: &Matrix,
        y: &[f64],
        _seed: u64,
    ) -> Result<Box<dyn Regressor>> {
        let ep = enet_params(params)?;
        let (n, p) = (x.rows(), x.cols());
        let nf = n as f64;
        let xm = column_means(x);
        let ym = mean(y);
        // column-major standardised copy
        let mut sd = vec![0.0; p];
        let mut z = vec![0.0; n * p];
        for c in 0..p {
            let var = (0..n).map(|r| (x.get(r, c) - xm[c]).powi(2)).sum::<f64>() / nf;
            sd[c] = var.sqrt();
            if sd[c] > 1e-12 {
                for r in 0..n {
                    z[c * n + r] = (x.get(r, c) - xm[c]) / sd[c];
                }
            }
        }
        let active: Vec<usize> = (0..p).filter(|&c| sd[c] > 1e-12).collect();
        let mut resid: Vec<f64> = y.iter().map(|v| v - ym).collect();
        let alpha_eff = ep.alpha.max(1e-3);
        let lambda = ep.lambda.unwrap_or_else(|| {
            let lmax = active
                .iter()
                .map(|&c| {
                    let col = &z[c * n..(c + 1) * n];
                    col.iter().zip(&resid).map(|(a, b)| a * b).sum::<f64>().abs() / (nf * alpha_eff)
                })
                .fold(0.0, f64::max);
            ep.lambda_ratio * lmax
        });
        let l1 = lambda * ep.alpha;
        let denom = 1.0 + lambda * (1.0 - ep.alpha);
        let mut beta = vec![0.0; p];
        for _ in 0..ep.max_iter {
            let mut max_delta = 0.0f64;
            for &c in &active {
                let col = &z[c * n..(c + 1) * n];
                let rho = col.iter().zip(&resid).map(|(a, b)| a * b).sum::<f64>() / nf + beta[c];
                let new = soft_threshold(rho, l1) / denom;
                let delta = new - beta[c];
                if delta != 0.0 {
                    for (r, v) in resid.iter_mut().zip(col) {
                        *r -= delta * v;
                    }
                    beta[c] = new;
                    max_delta = max_delta.max(delta.abs());
                }
            }
            if max_delta < ep.tol {
                break;
            }
        }
        let coef: Vec<f64> = (0..p)
            .map(|c| if sd[c] > 1e-12 { beta[c] / sd[c] } else { 0.0 })
            .collect();
        let intercept = ym - coef.iter().zip(&xm).map(|(b, m)| b * m).sum::<f64>();
        Ok(Box::new(LinearModel { intercept, coef }))
    }
}
