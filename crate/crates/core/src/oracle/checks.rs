//! Executable forms of the limit theorems: stationary-bias slope, detailed
//! balance, waiting-time and jump-probability limits, inhomogeneous
//! convergence, and the P_ε = I + εQ + O(ε²) expansion.

use super::stationary::{stationary_distribution, tv_distance};
use super::{
    build_bd_rate_matrix, build_mj_kernel, enumerate_rates, mj_kernel_row, DenseKernel,
    DistributionVector,
};
use crate::error::OracleError;
use crate::float::Real;
use crate::model::BinaryModel;
use crate::posterior::PosteriorModel;
use crate::rates::{compute_rates, RateVector};
use crate::schedule::EpsilonSchedule;

/// TV below this is reported as exact rather than fitted.
pub const EXACT_TV: f64 = 1e-10;

/// Least-squares slope of log y against log x.
pub fn fit_loglog_slope(rows: &[(f64, f64)]) -> f64 {
    let n = rows.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in rows {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[derive(Clone, Debug, PartialEq)]
pub enum BiasSlope {
    /// TV(π_ε, π) below [`EXACT_TV`] at every ε (the factorizable case).
    Exact,
    /// Fitted log-log slope of TV against ε.
    Slope(f64),
}

#[derive(Clone, Debug)]
pub struct BiasSlopeReport {
    /// (ε, TV(π_ε, π)) rows in the order given.
    pub rows: Vec<(f64, f64)>,
    pub outcome: BiasSlope,
}

/// Measures TV(π_ε, π) over the ε list and fits its log-log slope. π comes
/// from the rate matrix's null left vector, so the oracle never needs the
/// model's normalizing constant. Requires at least 4 decreasing ε values.
pub fn bias_slope<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    k: usize,
    eps_list: &[f64],
) -> Result<BiasSlopeReport, OracleError> {
    if eps_list.len() < 4 || eps_list.windows(2).any(|w| w[0] <= w[1]) {
        return Err(OracleError::InvalidInput(
            "bias slope needs >= 4 strictly decreasing epsilon values".into(),
        ));
    }
    let pi = stationary_distribution(&build_bd_rate_matrix(model, k)?)?;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let kernel = build_mj_kernel(model, k, S::from_f64(eps))?;
        let pi_eps = stationary_distribution(&kernel)?;
        rows.push((eps, tv_distance(&pi_eps, &pi)?.to_f64()));
    }
    let outcome = if rows.iter().all(|&(_, tv)| tv < EXACT_TV) {
        BiasSlope::Exact
    } else {
        BiasSlope::Slope(fit_loglog_slope(&rows))
    };
    Ok(BiasSlopeReport { rows, outcome })
}

#[derive(Clone, Debug)]
pub struct DetailedBalanceReport {
    pub max_violation: f64,
    pub pass: bool,
}

/// Max over pairs of |π(m)·K(m,m') − π(m')·K(m',m)|; applies to stochastic
/// kernels (discrete balance) and rate matrices (continuous balance) alike.
pub fn check_detailed_balance<S: Real>(
    kernel: &DenseKernel<S>,
    dist: &DistributionVector<S>,
    tol: f64,
) -> Result<DetailedBalanceReport, OracleError> {
    let n = kernel.n();
    if dist.len() != n {
        return Err(OracleError::LengthMismatch {
            left: dist.len(),
            right: n,
        });
    }
    let mut max_violation = 0.0f64;
    for from in 0..n {
        for to in from + 1..n {
            let flow = dist.get(from) * kernel.get(from, to);
            let back = dist.get(to) * kernel.get(to, from);
            max_violation = max_violation.max((flow - back).abs().to_f64());
        }
    }
    Ok(DetailedBalanceReport {
        max_violation,
        pass: max_violation <= tol,
    })
}

#[derive(Clone, Debug)]
pub struct WaitingTimeRow {
    pub epsilon: f64,
    /// Exact mean of the ε-scaled geometric waiting time, ε/(1 − r_ε(m)).
    pub scaled_mean: f64,
    /// Birth-death limit 1/λ(m).
    pub target: f64,
    /// sup over the grid of |P(εW ≤ u) − (1 − e^{−λ(m)u})|.
    pub cdf_sup_gap: f64,
}

#[derive(Clone, Debug)]
pub struct WaitingTimeReport {
    pub lambda: f64,
    pub rows: Vec<WaitingTimeRow>,
}

/// Compares the exact scaled waiting-time law of the homogeneous chain at `m`
/// with its birth-death limit, on a grid u ∈ [0, 5/λ(m)].
pub fn waiting_time_check<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    m: &BinaryModel,
    eps_list: &[f64],
    grid_points: usize,
) -> Result<WaitingTimeReport, OracleError> {
    let rates = compute_rates(model, m)?;
    let lambda = rates.total().to_f64();
    let u_max = 5.0 / lambda;
    let grid_points = grid_points.max(2);
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let ln_stay = ln_self_transition(&rates, eps);
        let stay = ln_stay.exp();
        let scaled_mean = eps / (1.0 - stay);
        let mut sup = 0.0f64;
        for j in 0..grid_points {
            let u = u_max * j as f64 / (grid_points - 1) as f64;
            let dtmc_cdf = 1.0 - ((u / eps).floor() * ln_stay).exp();
            let ctmc_cdf = 1.0 - (-lambda * u).exp();
            sup = sup.max((dtmc_cdf - ctmc_cdf).abs());
        }
        rows.push(WaitingTimeRow {
            epsilon: eps,
            scaled_mean,
            target: 1.0 / lambda,
            cdf_sup_gap: sup,
        });
    }
    Ok(WaitingTimeReport { lambda, rows })
}

/// ln r_ε(m) = Σ_i ln(1 − q_i(m)ε).
fn ln_self_transition<S: Real>(rates: &RateVector<S>, eps: f64) -> f64 {
    (0..rates.len())
        .map(|i| (1.0 - rates.get(i).to_f64() * eps).ln())
        .sum()
}

#[derive(Clone, Debug)]
pub struct JumpRow {
    pub epsilon: f64,
    /// (element index, exact conditional jump probability, limit q_i/λ).
    pub neighbors: Vec<(usize, f64, f64)>,
    /// Largest conditional jump probability to any non-neighbor state.
    pub max_non_neighbor: f64,
}

#[derive(Clone, Debug)]
pub struct JumpProbabilityReport {
    pub lambda: f64,
    pub rows: Vec<JumpRow>,
}

/// Conditional jump probabilities P̃_ε(m, m') = P_ε(m, m')/(1 − r_ε(m)) of
/// the homogeneous chain at `m`, against the birth-death limits q_i/λ for
/// neighbors and 0 elsewhere.
pub fn jump_probability_check<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    m: &BinaryModel,
    eps_list: &[f64],
) -> Result<JumpProbabilityReport, OracleError> {
    let k = m.len();
    if k > super::MAX_EXACT_DIM {
        return Err(OracleError::SpaceTooLarge {
            k,
            max: super::MAX_EXACT_DIM,
        });
    }
    let rates = compute_rates(model, m)?;
    let lambda = rates.total().to_f64();
    let from = m.to_index();
    let n = 1usize << k;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let mut row = vec![S::zero(); n];
        mj_kernel_row(&rates, k, S::from_f64(eps), from, &mut row);
        let escape = 1.0 - row[from].to_f64();
        let mut neighbors = Vec::with_capacity(k);
        let mut max_non_neighbor = 0.0f64;
        for to in 0..n {
            if to == from {
                continue;
            }
            let p_tilde = row[to].to_f64() / escape;
            let diff = from ^ to;
            if diff.count_ones() == 1 {
                let i = diff.trailing_zeros() as usize;
                neighbors.push((i, p_tilde, rates.get(i).to_f64() / lambda));
            } else {
                max_non_neighbor = max_non_neighbor.max(p_tilde);
            }
        }
        neighbors.sort_by_key(|&(i, _, _)| i);
        rows.push(JumpRow {
            epsilon: eps,
            neighbors,
            max_non_neighbor,
        });
    }
    Ok(JumpProbabilityReport { lambda, rows })
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    /// TV(μ_s, π) after each iteration s = 1..S.
    pub tv_series: Vec<f64>,
    pub final_tv: f64,
}

/// Propagates μ_{s+1} = μ_s P_{ε_s} exactly through dense kernels and tracks
/// TV(μ_s, π), with π from the rate-matrix null vector. `initial` defaults to
/// the uniform distribution.
pub fn inhomogeneous_convergence_check<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    k: usize,
    schedule: &EpsilonSchedule<S>,
    iterations: usize,
    initial: Option<DistributionVector<S>>,
) -> Result<ConvergenceReport, OracleError> {
    let rates = enumerate_rates(model, k)?;
    let n = 1usize << k;
    let pi = stationary_distribution(&build_bd_rate_matrix(model, k)?)?;
    let mut mu = match initial {
        Some(d) => {
            if d.len() != n {
                return Err(OracleError::LengthMismatch {
                    left: d.len(),
                    right: n,
                });
            }
            d
        }
        None => DistributionVector::uniform(n),
    };
    let mut tv_series = Vec::with_capacity(iterations);
    let mut row = vec![S::zero(); n];
    for s in 1..=iterations {
        let eps = schedule.evaluate(s).map_err(crate::error::SamplerError::from)?;
        let mut next = vec![S::zero(); n];
        for from in 0..n {
            let w = mu.get(from);
            if w == S::zero() {
                continue;
            }
            mj_kernel_row(&rates[from], k, eps, from, &mut row);
            for (slot, &p) in next.iter_mut().zip(row.iter()) {
                *slot += w * p;
            }
        }
        mu = DistributionVector::new_unchecked(next);
        tv_series.push(tv_distance(&mu, &pi)?.to_f64());
    }
    let final_tv = *tv_series.last().ok_or_else(|| {
        OracleError::InvalidInput("iterations must be >= 1".into())
    })?;
    Ok(ConvergenceReport {
        tv_series,
        final_tv,
    })
}

/// ‖P_ε − (I + εQ)‖_max, the residual of the first-order kernel expansion.
pub fn kernel_rate_residual<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    k: usize,
    epsilon: f64,
) -> Result<f64, OracleError> {
    let p = build_mj_kernel(model, k, S::from_f64(epsilon))?;
    let q = build_bd_rate_matrix(model, k)?;
    let n = p.n();
    let eps = S::from_f64(epsilon);
    let mut max = 0.0f64;
    for from in 0..n {
        for to in 0..n {
            let linear = eps * q.get(from, to) + if from == to { S::one() } else { S::zero() };
            max = max.max((p.get(from, to) - linear).abs().to_f64());
        }
    }
    Ok(max)
}

/// Residual rows (ε, ‖P_ε − I − εQ‖_max) plus their fitted log-log slope;
/// the expansion predicts a slope of 2.
pub fn kernel_rate_consistency<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    k: usize,
    eps_list: &[f64],
) -> Result<(Vec<(f64, f64)>, f64), OracleError> {
    let rows: Vec<(f64, f64)> = eps_list
        .iter()
        .map(|&eps| kernel_rate_residual(model, k, eps).map(|r| (eps, r)))
        .collect::<Result<_, _>>()?;
    let slope = fit_loglog_slope(&rows);
    Ok((rows, slope))
}
