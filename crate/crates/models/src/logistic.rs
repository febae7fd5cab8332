//! Maximum-likelihood logistic regression by iteratively reweighted least
//! squares, used for the nodewise Ising pseudo-likelihood scores.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum LogisticError {
    #[error("IRLS did not converge within {max_iterations} iterations (grad norm {grad_norm})")]
    Diverged {
        max_iterations: usize,
        grad_norm: f64,
    },
    #[error("weighted Hessian not positive definite")]
    SingularHessian,
}

#[derive(Clone, Debug)]
pub struct LogisticFit {
    pub beta: DVector<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
}

pub const IRLS_MAX_ITERATIONS: usize = 100;
pub const IRLS_GRAD_TOL: f64 = 1e-8;
/// Ridge added to the Hessian only (the objective is untouched), for
/// robustness under separation.
pub const IRLS_RIDGE: f64 = 1e-6;

fn log_likelihood(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter()
        .zip(y.iter())
        .map(|(&e, &yi)| yi * e - softplus(e))
        .sum()
}

#[inline]
fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else if x < -30.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Fits y ~ Bernoulli(sigmoid(xβ)). Newton steps with step halving; declares
/// convergence when the unpenalized gradient's max norm drops below
/// [`IRLS_GRAD_TOL`]. Separation shows up as non-convergence.
pub fn fit_logistic(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LogisticFit, LogisticError> {
    let d = x.ncols();
    let mut beta = DVector::zeros(d);
    let mut ll = log_likelihood(x, y, &beta);
    let mut grad_norm = f64::INFINITY;
    for iter in 1..=IRLS_MAX_ITERATIONS {
        let eta = x * &beta;
        let mu = eta.map(sigmoid);
        let grad = x.tr_mul(&(y - &mu));
        grad_norm = grad.amax();
        if grad_norm < IRLS_GRAD_TOL {
            return Ok(LogisticFit {
                beta,
                log_likelihood: ll,
                iterations: iter - 1,
            });
        }
        let weights = mu.map(|m| (m * (1.0 - m)).max(1e-12));
        let mut hessian = DMatrix::zeros(d, d);
        for r in 0..x.nrows() {
            let row = x.row(r);
            let w = weights[r];
            for a in 0..d {
                for b in a..d {
                    hessian[(a, b)] += w * row[a] * row[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                hessian[(a, b)] = hessian[(b, a)];
            }
            hessian[(a, a)] += IRLS_RIDGE;
        }
        let step = hessian
            .cholesky()
            .ok_or(LogisticError::SingularHessian)?
            .solve(&grad);
        // Step halving keeps the objective non-decreasing.
        let mut scale = 1.0;
        loop {
            let candidate = &beta + &step * scale;
            let cand_ll = log_likelihood(x, y, &candidate);
            if cand_ll >= ll - 1e-12 || scale < 1e-8 {
                beta = candidate;
                ll = cand_ll;
                break;
            }
            scale *= 0.5;
        }
    }
    Err(LogisticError::Diverged {
        max_iterations: IRLS_MAX_ITERATIONS,
        grad_norm,
    })
}
