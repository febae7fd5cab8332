//! Exact small-space verification oracle.
//!
//! For k ≤ 12 the full 2^k state space is enumerated: transition kernels and
//! rate matrices are built densely, stationary distributions are solved to
//! fixed-point precision, and the limit theorems of the sampler (O(ε) bias,
//! waiting-time and jump-probability convergence, inhomogeneous convergence)
//! become machine-checkable properties.

mod checks;
mod stationary;

pub use checks::{
    bias_slope, check_detailed_balance, fit_loglog_slope, inhomogeneous_convergence_check,
    jump_probability_check, kernel_rate_consistency, kernel_rate_residual, waiting_time_check,
    BiasSlope, BiasSlopeReport, ConvergenceReport, DetailedBalanceReport, JumpProbabilityReport,
    JumpRow, WaitingTimeReport, WaitingTimeRow,
};
pub use stationary::{stationary_distribution, stationary_distribution_with, tv_distance};

use crate::error::OracleError;
use crate::float::Real;
use crate::model::BinaryModel;
use crate::posterior::PosteriorModel;
use crate::rates::{compute_rates, RateVector};

/// Largest exactly-enumerable dimension (2^12 × 2^12 kernels are the worst
/// case that comfortably fits in memory).
pub const MAX_EXACT_DIM: usize = 12;

/// Row-sum / rate-matrix validation tolerance used by the f64 oracle.
pub const KERNEL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelKind {
    /// Multiple-jump transition matrix P_ε.
    MultipleJump { epsilon: f64 },
    /// Birth-death rate matrix Q (rows sum to zero).
    BdRateMatrix,
    /// MH-corrected transition matrix at fixed ε.
    MhCorrected { epsilon: f64 },
}

impl KernelKind {
    fn name(&self) -> &'static str {
        match self {
            Self::MultipleJump { .. } => "multiple-jump",
            Self::BdRateMatrix => "bd-rate-matrix",
            Self::MhCorrected { .. } => "mh-corrected",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        !matches!(self, Self::BdRateMatrix)
    }
}

/// Dense kernel over the 2^k bit-packed states.
#[derive(Clone, Debug)]
pub struct DenseKernel<S> {
    k: usize,
    kind: KernelKind,
    entries: Vec<S>,
}

impl<S: Real> DenseKernel<S> {
    pub fn dim(&self) -> usize {
        self.k
    }

    /// Number of states n = 2^k.
    pub fn n(&self) -> usize {
        1 << self.k
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> S {
        self.entries[from * self.n() + to]
    }

    pub fn row(&self, from: usize) -> &[S] {
        let n = self.n();
        &self.entries[from * n..(from + 1) * n]
    }

    /// Checks the defining invariant at the given tolerance: stochastic kinds
    /// are row-stochastic with non-negative entries; the rate-matrix kind has
    /// zero row sums and non-negative off-diagonals.
    pub fn validate_with(&self, tol: f64) -> Result<(), OracleError> {
        let n = self.n();
        for from in 0..n {
            let row = self.row(from);
            let sum: S = row.iter().cloned().sum();
            match self.kind {
                KernelKind::MultipleJump { .. } | KernelKind::MhCorrected { .. } => {
                    if (sum - S::one()).abs().to_f64() > tol {
                        return Err(OracleError::InvalidInput(format!(
                            "row {} of {} kernel sums to {}",
                            from,
                            self.kind.name(),
                            sum
                        )));
                    }
                    if row.iter().any(|p| *p < S::zero()) {
                        return Err(OracleError::InvalidInput(format!(
                            "row {} has a negative entry",
                            from
                        )));
                    }
                }
                KernelKind::BdRateMatrix => {
                    if sum.abs().to_f64() > tol {
                        return Err(OracleError::InvalidInput(format!(
                            "row {} of rate matrix sums to {}",
                            from, sum
                        )));
                    }
                    for (to, q) in row.iter().enumerate() {
                        if to != from && *q < S::zero() {
                            return Err(OracleError::InvalidInput(format!(
                                "negative off-diagonal rate at ({}, {})",
                                from, to
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        self.validate_with(KERNEL_TOL)
    }
}

/// A probability vector over the 2^k bit-packed states.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionVector<S> {
    probs: Vec<S>,
}

impl<S: Real> DistributionVector<S> {
    pub fn new(probs: Vec<S>) -> Result<Self, OracleError> {
        if probs.iter().any(|p| *p < S::zero()) {
            return Err(OracleError::InvalidInput(
                "distribution has a negative entry".into(),
            ));
        }
        let sum: S = probs.iter().cloned().sum();
        if (sum - S::one()).abs().to_f64() > KERNEL_TOL {
            return Err(OracleError::InvalidInput(format!(
                "distribution sums to {}",
                sum
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![S::one() / S::from_usize(n); n],
        }
    }

    pub(crate) fn new_unchecked(probs: Vec<S>) -> Self {
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    #[inline]
    pub fn get(&self, state: usize) -> S {
        self.probs[state]
    }
}

fn check_capacity(k: usize) -> Result<(), OracleError> {
    if k == 0 || k > MAX_EXACT_DIM {
        Err(OracleError::SpaceTooLarge {
            k,
            max: MAX_EXACT_DIM,
        })
    } else {
        Ok(())
    }
}

/// Rate vectors at every state of the space, indexed by packed state.
pub fn enumerate_rates<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    k: usize,
) -> Result<Vec<RateVector<S>>, OracleError> {
    check_capacity(k)?;
    if model.dim() != k {
        return Err(OracleError::InvalidInput(format!(
            "model dimension {} does not match k = {}",
            model.dim(),
            k
        )));
    }
    (0..1usize << k)
        .map(|idx| compute_rates(model, &BinaryModel::from_index(idx, k)).map_err(Into::into))
        .collect()
}

/// P_ε(m, m') = Π_{i∈H} q_i(m)ε · Π_{i∉H} (1 − q_i(m)ε) over all state pairs.
pub fn build_mj_kernel<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    k: usize,
    epsilon: S,
) -> Result<DenseKernel<S>, OracleError> {
    let rates = enumerate_rates(model, k)?;
    Ok(mj_kernel_from_rates(&rates, k, epsilon))
}

pub(crate) fn mj_kernel_from_rates<S: Real>(
    rates: &[RateVector<S>],
    k: usize,
    epsilon: S,
) -> DenseKernel<S> {
    let n = 1usize << k;
    let mut entries = vec![S::zero(); n * n];
    for from in 0..n {
        mj_kernel_row(&rates[from], k, epsilon, from, &mut entries[from * n..(from + 1) * n]);
    }
    DenseKernel {
        k,
        kind: KernelKind::MultipleJump {
            epsilon: epsilon.to_f64(),
        },
        entries,
    }
}

/// Fills one kernel row: out[to] = P_ε(from, to).
pub(crate) fn mj_kernel_row<S: Real>(
    rates: &RateVector<S>,
    k: usize,
    epsilon: S,
    from: usize,
    out: &mut [S],
) {
    let flip: Vec<S> = (0..k).map(|i| rates.get(i) * epsilon).collect();
    let stay: Vec<S> = flip.iter().map(|f| S::one() - *f).collect();
    for (to, slot) in out.iter_mut().enumerate() {
        let diff = from ^ to;
        let mut p = S::one();
        for (i, (f, st)) in flip.iter().zip(&stay).enumerate() {
            p = p * if diff >> i & 1 == 1 { *f } else { *st };
        }
        *slot = p;
    }
}

/// Birth-death rate matrix: Q(m, m^i) = q_i(m), diagonal −λ(m), zero
/// elsewhere.
pub fn build_bd_rate_matrix<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    k: usize,
) -> Result<DenseKernel<S>, OracleError> {
    let rates = enumerate_rates(model, k)?;
    let n = 1usize << k;
    let mut entries = vec![S::zero(); n * n];
    for from in 0..n {
        for i in 0..k {
            entries[from * n + (from ^ (1 << i))] = rates[from].get(i);
        }
        entries[from * n + from] = -rates[from].total();
    }
    Ok(DenseKernel {
        k,
        kind: KernelKind::BdRateMatrix,
        entries,
    })
}

/// MH-corrected kernel at fixed ε: the multiple-jump kernel as proposal with
/// acceptance min{1, π(m')P_ε(m',m) / (π(m)P_ε(m,m'))}; rejected mass goes to
/// the diagonal.
pub fn build_mh_kernel<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    k: usize,
    epsilon: S,
) -> Result<DenseKernel<S>, OracleError> {
    let rates = enumerate_rates(model, k)?;
    let proposal = mj_kernel_from_rates(&rates, k, epsilon);
    let log_score = log_scores(model, k)?;
    let n = 1usize << k;
    let mut entries = vec![S::zero(); n * n];
    for from in 0..n {
        let mut off_mass = S::zero();
        for to in 0..n {
            if to == from {
                continue;
            }
            let log_alpha = log_score[to] - log_score[from]
                + proposal.get(to, from).ln()
                - proposal.get(from, to).ln();
            let alpha = log_alpha.min(S::zero()).exp();
            let p = proposal.get(from, to) * alpha;
            entries[from * n + to] = p;
            off_mass += p;
        }
        entries[from * n + from] = S::one() - off_mass;
    }
    Ok(DenseKernel {
        k,
        kind: KernelKind::MhCorrected {
            epsilon: epsilon.to_f64(),
        },
        entries,
    })
}

/// Unnormalized log posterior over all states, rebuilt from single-flip
/// ratios along bit-ascending paths (score of the all-zeros state is 0).
pub fn log_scores<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    k: usize,
) -> Result<Vec<S>, OracleError> {
    check_capacity(k)?;
    let n = 1usize << k;
    let mut scores = vec![S::zero(); n];
    for idx in 1..n {
        let low_bit = idx.trailing_zeros() as usize;
        let prev = idx ^ (1 << low_bit);
        let lr = model.log_ratio(&BinaryModel::from_index(prev, k), low_bit)?;
        scores[idx] = scores[prev] + lr;
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::TabledPosterior;

    fn quirk_space() -> TabledPosterior<f64> {
        TabledPosterior::from_probabilities(2, &[0.33, 0.33, 0.33, 0.01])
    }

    #[test]
    fn one_element_kernel_is_symmetric_coin() {
        // k=1, q(0)=q(1)=1, ε=0.4: P = [[0.6, 0.4], [0.4, 0.6]].
        let model = TabledPosterior::from_log_probabilities(1, vec![0.0f64, 0.0]);
        let kernel = build_mj_kernel(&model, 1, 0.4).unwrap();
        assert!((kernel.get(0, 0) - 0.6).abs() < 1e-15);
        assert!((kernel.get(0, 1) - 0.4).abs() < 1e-15);
        assert!((kernel.get(1, 0) - 0.4).abs() < 1e-15);
        assert!((kernel.get(1, 1) - 0.6).abs() < 1e-15);
        kernel.validate().unwrap();
    }

    #[test]
    fn quirk_space_long_jump_entry() {
        let kernel = build_mj_kernel(&quirk_space(), 2, 0.9).unwrap();
        // ((0,0), (1,1)) = ε² = 0.81 since both rates are 1.
        assert!((kernel.get(0, 3) - 0.81).abs() < 1e-15);
        kernel.validate().unwrap();
    }

    #[test]
    fn rows_sum_to_one_and_entries_positive_up_to_k12() {
        for k in [3usize, 6, 12] {
            let model = TabledPosterior::<f64>::random(k, 1.0, k as u64);
            let kernel = build_mj_kernel(&model, k, 0.35).unwrap();
            kernel.validate().unwrap();
            // Global reachability: every entry strictly positive.
            let min = kernel
                .entries
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min > 0.0, "k={}: min entry {}", k, min);
        }
    }

    #[test]
    fn capacity_guard() {
        let model = TabledPosterior::<f64>::random(3, 1.0, 1);
        assert!(matches!(
            build_mj_kernel(&model, 13, 0.5),
            Err(OracleError::SpaceTooLarge { k: 13, .. })
        ));
    }

    #[test]
    fn bd_rate_matrix_satisfies_continuous_detailed_balance() {
        let model = TabledPosterior::<f64>::random(5, 1.3, 17);
        let q = build_bd_rate_matrix(&model, 5).unwrap();
        q.validate().unwrap();
        let pi = model.probabilities();
        let n = 1usize << 5;
        for from in 0..n {
            for i in 0..5 {
                let to = from ^ (1 << i);
                let lhs = pi[from] * q.get(from, to);
                let rhs = pi[to] * q.get(to, from);
                assert!(
                    (lhs - rhs).abs() < 1e-12,
                    "detailed balance violated at ({}, {}): {} vs {}",
                    from,
                    to,
                    lhs,
                    rhs
                );
            }
        }
    }

    #[test]
    fn log_scores_match_the_table() {
        let model = TabledPosterior::<f64>::random(4, 1.0, 9);
        let scores = log_scores(&model, 4).unwrap();
        for idx in 0..16 {
            let expect = model.log_prob(&BinaryModel::from_index(idx, 4))
                - model.log_prob(&BinaryModel::from_index(0, 4));
            assert!((scores[idx] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn mh_kernel_is_stochastic() {
        let model = TabledPosterior::<f64>::random(4, 1.5, 23);
        let kernel = build_mh_kernel(&model, 4, 0.5).unwrap();
        kernel.validate().unwrap();
    }

    #[test]
    fn f32_kernel_smoke() {
        let model = TabledPosterior::<f32>::random(3, 1.0, 2);
        let kernel = build_mj_kernel(&model, 3, 0.4f32).unwrap();
        kernel.validate_with(1e-5).unwrap();
    }
}
