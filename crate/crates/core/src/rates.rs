//! Birth-death transition rates q_i(m) = min{1, p(m^i|y)/p(m|y)}.

use rayon::prelude::*;

use crate::error::EvalError;
use crate::float::Real;
use crate::model::BinaryModel;
use crate::posterior::PosteriorModel;

/// Rates are computed in the log domain, q_i = exp(min{0, log ratio}), and
/// floored here so the strict-positivity invariant survives underflow of
/// extreme ratios (a zero rate would break irreducibility).
pub const RATE_FLOOR: f64 = 1e-12;

/// Rate evaluation switches to data-parallel above this dimension.
const PAR_THRESHOLD: usize = 128;

/// The k birth-death rates at one state, each in (0, 1].
#[derive(Clone, Debug)]
pub struct RateVector<S> {
    rates: Vec<S>,
    total: S,
    state_fingerprint: u64,
}

impl<S: Real> RateVector<S> {
    pub fn rates(&self) -> &[S] {
        &self.rates
    }

    #[inline]
    pub fn get(&self, i: usize) -> S {
        self.rates[i]
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Total exit rate λ(m) = Σ_i q_i(m).
    pub fn total(&self) -> S {
        self.total
    }

    /// Fingerprint of the model the rates were computed at.
    pub fn state_fingerprint(&self) -> u64 {
        self.state_fingerprint
    }

    /// Index of the birth-death jump target for a uniform draw `u` in (0,1):
    /// element i is chosen with probability q_i / λ.
    pub fn categorical_index(&self, u: f64) -> usize {
        let target = S::from_f64(u) * self.total;
        let mut acc = S::zero();
        for (i, q) in self.rates.iter().enumerate() {
            acc += *q;
            if target < acc {
                return i;
            }
        }
        self.rates.len() - 1
    }
}

/// Computes the rate vector at `m`. Evaluations are independent per element
/// and run data-parallel for large k; the result is deterministic regardless
/// of thread count. The first failing element (by index) is reported.
pub fn compute_rates<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    m: &BinaryModel,
) -> Result<RateVector<S>, EvalError> {
    let k = model.dim();
    debug_assert_eq!(m.len(), k);
    let one_rate = |i: usize| -> Result<S, EvalError> {
        let lr = model.log_ratio(m, i)?;
        if !lr.is_finite() {
            return Err(EvalError::NonFinite {
                index: i,
                value: lr.to_f64(),
            });
        }
        Ok(lr.min(S::zero()).exp().max(S::from_f64(RATE_FLOOR)))
    };

    let rates: Vec<S> = if k >= PAR_THRESHOLD {
        let results: Vec<Result<S, EvalError>> = (0..k).into_par_iter().map(one_rate).collect();
        let mut rates = Vec::with_capacity(k);
        for r in results {
            rates.push(r?);
        }
        rates
    } else {
        let mut rates = Vec::with_capacity(k);
        for i in 0..k {
            rates.push(one_rate(i)?);
        }
        rates
    };

    let total = rates.iter().cloned().sum();
    Ok(RateVector {
        rates,
        total,
        state_fingerprint: m.fingerprint(),
    })
}
