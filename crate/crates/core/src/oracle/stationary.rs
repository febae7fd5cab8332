//! Stationary-distribution solves and total variation distance.

use nalgebra::DMatrix;

use super::{DenseKernel, DistributionVector, KernelKind};
use crate::error::OracleError;
use crate::float::Real;

/// Default fixed-point residual ‖μP − μ‖₁.
pub const STATIONARY_TOL: f64 = 1e-12;
/// Default sweep budget for the power iteration.
pub const MAX_SWEEPS: usize = 1_000_000;
/// Direct null-space fallback is attempted up to this state count.
const DIRECT_SOLVE_MAX_N: usize = 1024;

/// Unique left fixed point of a stochastic kernel, or the null left vector of
/// a rate matrix (solved through its uniformized chain, which has the same
/// fixed point). Power iteration to the requested residual, with a direct
/// linear solve as fallback on small spaces.
pub fn stationary_distribution<S: Real>(
    kernel: &DenseKernel<S>,
) -> Result<DistributionVector<S>, OracleError> {
    stationary_distribution_with(kernel, STATIONARY_TOL, MAX_SWEEPS)
}

pub fn stationary_distribution_with<S: Real>(
    kernel: &DenseKernel<S>,
    tol: f64,
    max_sweeps: usize,
) -> Result<DistributionVector<S>, OracleError> {
    let n = kernel.n();
    let matrix: Vec<S>;
    let entries: &[S] = match kernel.kind() {
        KernelKind::MultipleJump { .. } | KernelKind::MhCorrected { .. } => {
            &kernel.entries
        }
        KernelKind::BdRateMatrix => {
            // Uniformize: P = I + Q/c with c the largest exit rate. πP = π
            // iff πQ = 0.
            let c = (0..n)
                .map(|m| -kernel.get(m, m))
                .fold(S::zero(), S::max);
            if !(c > S::zero()) {
                return Err(OracleError::InvalidInput(
                    "rate matrix has no positive exit rate".into(),
                ));
            }
            let mut p = vec![S::zero(); n * n];
            for from in 0..n {
                for to in 0..n {
                    let q = kernel.get(from, to) / c;
                    p[from * n + to] = if from == to { S::one() + q } else { q };
                }
            }
            matrix = p;
            &matrix
        }
    };
    power_iterate(entries, n, tol, max_sweeps)
}

fn power_iterate<S: Real>(
    entries: &[S],
    n: usize,
    tol: f64,
    max_sweeps: usize,
) -> Result<DistributionVector<S>, OracleError> {
    let mut mu = vec![S::one() / S::from_usize(n); n];
    let mut next = vec![S::zero(); n];
    let mut residual = f64::INFINITY;
    let mut prev_residual = f64::INFINITY;
    for _ in 0..max_sweeps {
        left_multiply(entries, n, &mu, &mut next);
        // Renormalize to guard against drift.
        let total: S = next.iter().cloned().sum();
        for x in next.iter_mut() {
            *x /= total;
        }
        residual = mu
            .iter()
            .zip(&next)
            .map(|(a, b)| (*a - *b).abs().to_f64())
            .sum();
        std::mem::swap(&mut mu, &mut next);
        // The residual alone overstates progress by the spectral gap: the
        // remaining error is about residual·ρ/(1−ρ) for contraction rate ρ.
        let rate = residual / prev_residual;
        let err_est = if rate < 1.0 {
            residual * rate / (1.0 - rate)
        } else {
            f64::INFINITY
        };
        if (residual < tol && err_est < tol) || residual < 1e-15 {
            return Ok(DistributionVector::new_unchecked(mu));
        }
        prev_residual = residual;
    }
    if n <= DIRECT_SOLVE_MAX_N {
        if let Some(direct) = direct_null_left_vector(entries, n) {
            return Ok(direct);
        }
    }
    Err(OracleError::NoConvergence {
        residual,
        sweeps: max_sweeps,
    })
}

#[inline]
fn left_multiply<S: Real>(entries: &[S], n: usize, mu: &[S], out: &mut [S]) {
    out.iter_mut().for_each(|x| *x = S::zero());
    for (from, &w) in mu.iter().enumerate() {
        if w == S::zero() {
            continue;
        }
        let row = &entries[from * n..(from + 1) * n];
        for (slot, &p) in out.iter_mut().zip(row) {
            *slot += w * p;
        }
    }
}

/// Solves μ(P − I) = 0 with Σμ = 1 directly (LU in f64), replacing the last
/// equation by the normalization row.
fn direct_null_left_vector<S: Real>(entries: &[S], n: usize) -> Option<DistributionVector<S>> {
    let mut a = DMatrix::<f64>::zeros(n, n);
    // (Pᵀ − I) x = 0 in the first n−1 rows, normalization in the last.
    for from in 0..n {
        for to in 0..n {
            a[(to, from)] = entries[from * n + to].to_f64() - if to == from { 1.0 } else { 0.0 };
        }
    }
    for from in 0..n {
        a[(n - 1, from)] = 1.0;
    }
    let mut b = nalgebra::DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let solution = a.lu().solve(&b)?;
    if solution.iter().any(|x| !x.is_finite() || *x < -1e-9) {
        return None;
    }
    let total: f64 = solution.iter().sum();
    Some(DistributionVector::new_unchecked(
        solution
            .iter()
            .map(|x| S::from_f64((x / total).max(0.0)))
            .collect(),
    ))
}

/// Total variation distance ½‖a − b‖₁.
pub fn tv_distance<S: Real>(
    a: &DistributionVector<S>,
    b: &DistributionVector<S>,
) -> Result<S, OracleError> {
    if a.len() != b.len() {
        return Err(OracleError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let l1: S = a
        .probs()
        .iter()
        .zip(b.probs())
        .map(|(x, y)| (*x - *y).abs())
        .sum();
    Ok(l1 / S::from_f64(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{build_bd_rate_matrix, build_mj_kernel};
    use crate::posterior::TabledPosterior;

    #[test]
    fn symmetric_two_state_kernel_has_uniform_fixed_point() {
        let model = TabledPosterior::from_log_probabilities(1, vec![0.0f64, 0.0]);
        let kernel = build_mj_kernel(&model, 1, 0.4).unwrap();
        let pi = stationary_distribution(&kernel).unwrap();
        assert!((pi.get(0) - 0.5).abs() < 1e-12);
        assert!((pi.get(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bd_null_vector_recovers_the_posterior() {
        let model = TabledPosterior::<f64>::random(6, 1.2, 42);
        let q = build_bd_rate_matrix(&model, 6).unwrap();
        let pi = stationary_distribution(&q).unwrap();
        let table = DistributionVector::new(model.probabilities()).unwrap();
        let tv = tv_distance(&pi, &table).unwrap();
        assert!(tv < 1e-11, "tv = {}", tv);
    }

    #[test]
    fn tv_distance_examples() {
        let p = DistributionVector::new(vec![0.75f64, 0.25]).unwrap();
        let q = DistributionVector::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        assert!((tv_distance(&p, &q).unwrap() - 0.25).abs() < 1e-15);
        let point_a = DistributionVector::new(vec![1.0, 0.0]).unwrap();
        let point_b = DistributionVector::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(tv_distance(&point_a, &point_b).unwrap(), 1.0);
        let wide = DistributionVector::new(vec![0.5; 2]).unwrap();
        let wider = DistributionVector::uniform(4);
        assert!(matches!(
            tv_distance(&wide, &wider),
            Err(OracleError::LengthMismatch { left: 2, right: 4 })
        ));
    }

    #[test]
    fn direct_solve_agrees_with_power_iteration() {
        let model = TabledPosterior::<f64>::random(4, 1.5, 3);
        let kernel = build_mj_kernel(&model, 4, 0.3).unwrap();
        let by_power = stationary_distribution(&kernel).unwrap();
        let by_lu = direct_null_left_vector(&kernel.entries, kernel.n()).unwrap();
        let tv = tv_distance(&by_power, &by_lu).unwrap();
        assert!(tv < 1e-10, "tv = {}", tv);
    }
}
