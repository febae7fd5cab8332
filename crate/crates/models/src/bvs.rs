//! g-prior Bayesian variable selection over linear regression models.
//!
//! For models γ differing in one variable the Bayes factor is closed-form:
//!   BF(γ^i : γ) = (1+g)^{(|γ|−|γ^i|)/2} ·
//!                 [(1+g(1−R²_γ)) / (1+g(1−R²_{γ^i}))]^{(n−1)/2},
//! with R²_γ the coefficient of determination of the intercept-free least
//! squares fit on the active columns. The regression model has no intercept
//! and unit noise variance, so the response is centered and the design
//! columns are scaled to unit norm at construction; no intercept column is
//! added.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::cache::{hash128, ValueCache, DEFAULT_CACHE_CAPACITY};
use mjmc_core::{BinaryModel, EvalError, PosteriorModel};

const BVS_SALT: u64 = 0xb5;

#[derive(Debug, Clone, Error)]
pub enum BvsError {
    #[error("response has zero total sum of squares: R² undefined")]
    UndefinedRSquared,
    #[error("design is {rows}x{cols} but response has {len} entries")]
    DimensionMismatch { rows: usize, cols: usize, len: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("least-squares solve failed")]
    SolveFailed,
}

/// Intercept-free R² = 1 − RSS/TSS with TSS = Σ y_i². The boolean flags a
/// rank-deficient active set, solved by the minimum-norm solution.
pub fn r_squared_flagged(
    y: &DVector<f64>,
    x_active: &DMatrix<f64>,
) -> Result<(f64, bool), BvsError> {
    if x_active.nrows() != y.len() {
        return Err(BvsError::DimensionMismatch {
            rows: x_active.nrows(),
            cols: x_active.ncols(),
            len: y.len(),
        });
    }
    let tss = y.dot(y);
    if tss == 0.0 {
        return Err(BvsError::UndefinedRSquared);
    }
    if x_active.ncols() == 0 {
        return Ok((0.0, false));
    }
    let xtx = x_active.tr_mul(x_active);
    let xty = x_active.tr_mul(y);
    let (beta, rank_deficient) = match xtx.clone().cholesky() {
        Some(chol) => (chol.solve(&xty), false),
        None => {
            let svd = x_active.clone().svd(true, true);
            let beta = svd
                .solve(y, 1e-10)
                .map_err(|_| BvsError::SolveFailed)?;
            (beta, true)
        }
    };
    let rss = (y - x_active * beta).norm_squared();
    Ok(((1.0 - rss / tss).clamp(0.0, 1.0), rank_deficient))
}

/// Coefficient of determination of least squares on the active columns.
pub fn r_squared(y: &DVector<f64>, x_active: &DMatrix<f64>) -> Result<f64, BvsError> {
    r_squared_flagged(y, x_active).map(|(r2, _)| r2)
}

pub struct BvsModel {
    design: DMatrix<f64>,
    response: DVector<f64>,
    g: f64,
    prior_inclusion: f64,
    cache: ValueCache,
    rank_deficient_events: AtomicU64,
}

impl BvsModel {
    pub fn new(
        design: DMatrix<f64>,
        response: DVector<f64>,
        g: f64,
        prior_inclusion: f64,
    ) -> Result<Self, BvsError> {
        Self::with_cache_capacity(design, response, g, prior_inclusion, DEFAULT_CACHE_CAPACITY)
    }

    pub fn with_cache_capacity(
        mut design: DMatrix<f64>,
        mut response: DVector<f64>,
        g: f64,
        prior_inclusion: f64,
        cache_capacity: usize,
    ) -> Result<Self, BvsError> {
        if design.nrows() != response.len() {
            return Err(BvsError::DimensionMismatch {
                rows: design.nrows(),
                cols: design.ncols(),
                len: response.len(),
            });
        }
        if design.nrows() < 2 || design.ncols() == 0 {
            return Err(BvsError::InvalidParameter(
                "need n >= 2 observations and k >= 1 candidate variables".into(),
            ));
        }
        if !(g > 0.0) {
            return Err(BvsError::InvalidParameter(format!("g = {} must be positive", g)));
        }
        if !(prior_inclusion > 0.0 && prior_inclusion < 1.0) {
            return Err(BvsError::InvalidParameter(format!(
                "prior inclusion probability {} outside (0, 1)",
                prior_inclusion
            )));
        }
        // Center the response; scale columns to unit norm (zero columns are
        // left in place and simply never explain anything).
        let mean = response.mean();
        response.add_scalar_mut(-mean);
        for mut col in design.column_iter_mut() {
            let norm = col.norm();
            if norm > 1e-12 {
                col /= norm;
            }
        }
        let cache = if cache_capacity == 0 {
            ValueCache::disabled()
        } else {
            ValueCache::new(cache_capacity)
        };
        Ok(Self {
            design,
            response,
            g,
            prior_inclusion,
            cache,
            rank_deficient_events: AtomicU64::new(0),
        })
    }

    pub fn observations(&self) -> usize {
        self.design.nrows()
    }

    pub fn variables(&self) -> usize {
        self.design.ncols()
    }

    /// Number of times a rank-deficient active set fell back to the
    /// minimum-norm solution.
    pub fn rank_deficient_events(&self) -> u64 {
        self.rank_deficient_events.load(Ordering::Relaxed)
    }

    /// R²_γ for the active set of `gamma`, cached by active set.
    pub fn r_squared_of(&self, gamma: &BinaryModel) -> Result<f64, BvsError> {
        let active = gamma.ones();
        let key = hash128(BVS_SALT, 0, &active);
        self.cache.get_or_try_insert(key, || {
            let x_active = self.design.select_columns(
                active.iter().map(|&c| c as usize).collect::<Vec<_>>().iter(),
            );
            let (r2, rank_deficient) = r_squared_flagged(&self.response, &x_active)?;
            if rank_deficient {
                self.rank_deficient_events.fetch_add(1, Ordering::Relaxed);
            }
            Ok(r2)
        })
    }

    /// log(p(γ^i | y) / p(γ | y)): the closed-form Bayes factor plus the
    /// Bernoulli prior ratio.
    pub fn log_ratio_element(&self, gamma: &BinaryModel, index: usize) -> Result<f64, BvsError> {
        let n = self.observations() as f64;
        let adding = !gamma.get(index);
        let r2_cur = self.r_squared_of(gamma)?;
        let flipped = gamma.flipped(index);
        let r2_flip = self.r_squared_of(&flipped)?;
        // |γ| − |γ^i| is −1 for an addition, +1 for a deletion.
        let size_diff = if adding { -1.0 } else { 1.0 };
        let log_bf = 0.5 * size_diff * (1.0 + self.g).ln()
            + 0.5 * (n - 1.0)
                * ((1.0 + self.g * (1.0 - r2_cur)).ln() - (1.0 + self.g * (1.0 - r2_flip)).ln());
        let prior = (self.prior_inclusion / (1.0 - self.prior_inclusion)).ln();
        Ok(log_bf + if adding { prior } else { -prior })
    }
}

impl PosteriorModel<f64> for BvsModel {
    fn dim(&self) -> usize {
        self.variables()
    }

    fn log_ratio(&self, m: &BinaryModel, index: usize) -> Result<f64, EvalError> {
        self.log_ratio_element(m, index)
            .map_err(|e| EvalError::evaluation(index, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_r_squared() {
        // y = (1,2,3), single column of ones: fit ŷ = (2,2,2), RSS = 2,
        // TSS = 14, R² = 6/7.
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = DMatrix::from_vec(3, 1, vec![1.0, 1.0, 1.0]);
        let r2 = r_squared(&y, &x).unwrap();
        assert!((r2 - 6.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn empty_active_set_and_exact_span() {
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let empty = DMatrix::<f64>::zeros(3, 0);
        assert_eq!(r_squared(&y, &empty).unwrap(), 0.0);
        // y in the column span: R² = 1.
        let x = DMatrix::from_vec(3, 1, vec![1.0, 2.0, 3.0]);
        assert!((r_squared(&y, &x).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_response_is_an_error() {
        let y = DVector::from_vec(vec![0.0, 0.0]);
        let x = DMatrix::from_vec(2, 1, vec![1.0, 1.0]);
        assert!(matches!(
            r_squared(&y, &x),
            Err(BvsError::UndefinedRSquared)
        ));
    }

    #[test]
    fn rank_deficient_uses_minimum_norm_and_flags() {
        // Duplicate columns: XᵀX singular.
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let x = DMatrix::from_vec(4, 2, vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let (r2, flagged) = r_squared_flagged(&y, &x).unwrap();
        assert!(flagged);
        // Same fit as the single column: ŷ = 2.5; RSS = 5; TSS = 30.
        assert!((r2 - (1.0 - 5.0 / 30.0)).abs() < 1e-12);
    }

    fn toy_model(k: usize, g: f64, rho: f64) -> BvsModel {
        // Deterministic small design, no randomness needed here.
        let n = 12;
        let design = DMatrix::from_fn(n, k, |r, c| ((r * (c + 3) + c * c) % 7) as f64 - 3.0);
        let response = DVector::from_fn(n, |r, _| (r as f64 * 0.7).sin() * 2.0 + 1.0);
        BvsModel::new(design, response, g, rho).unwrap()
    }

    #[test]
    fn deleting_an_all_zero_column_favors_the_smaller_model() {
        // A zero column leaves R² unchanged, so BF for deletion is
        // (1+g)^{1/2}; with g = 3 that is 2, and the reverse move is 1/2.
        let n = 12;
        let mut design = DMatrix::from_fn(n, 2, |r, c| ((r + c) % 5) as f64 - 2.0);
        design.set_column(1, &DVector::zeros(n));
        let response = DVector::from_fn(n, |r, _| (r as f64).cos());
        let model = BvsModel::new(design, response, 3.0, 0.5).unwrap();
        // ρ = 0.5 makes the prior term vanish.
        let gamma = BinaryModel::from_bits(&[true, true]);
        let delete = model.log_ratio_element(&gamma, 1).unwrap();
        assert!((delete - 0.5 * 4.0f64.ln()).abs() < 1e-12);
        let add = model
            .log_ratio_element(&BinaryModel::from_bits(&[true, false]), 1)
            .unwrap();
        assert!((add + 0.5 * 4.0f64.ln()).abs() < 1e-12);
        assert!((add.exp() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn telescoping_and_path_independence() {
        let model = toy_model(5, 7.0, 0.3);
        for idx in [0usize, 9, 21, 30] {
            let gamma = BinaryModel::from_index(idx, 5);
            for i in 0..5 {
                let fwd = model.log_ratio_element(&gamma, i).unwrap();
                let bwd = model.log_ratio_element(&gamma.flipped(i), i).unwrap();
                assert!((fwd + bwd).abs() < 1e-12);
            }
            // 4-cycle through elements 1 and 3.
            let mut total = 0.0;
            let mut walker = gamma.clone();
            for step in [1usize, 3, 1, 3] {
                total += model.log_ratio_element(&walker, step).unwrap();
                walker.flip(step);
            }
            assert!(total.abs() < 1e-12);
        }
    }

    #[test]
    fn prior_monotonicity_of_the_additive_term() {
        let lean = toy_model(4, 5.0, 0.1);
        let rich = toy_model(4, 5.0, 0.4);
        let gamma = BinaryModel::zeros(4);
        for i in 0..4 {
            let lr_lean = lean.log_ratio_element(&gamma, i).unwrap();
            let lr_rich = rich.log_ratio_element(&gamma, i).unwrap();
            let expected_gap = (0.4f64 / 0.6).ln() - (0.1f64 / 0.9).ln();
            assert!((lr_rich - lr_lean - expected_gap).abs() < 1e-12);
            assert!(lr_rich > lr_lean);
        }
    }

    #[test]
    fn cache_transparency() {
        let cached = toy_model(5, 7.0, 0.3);
        let design = DMatrix::from_fn(12, 5, |r, c| ((r * (c + 3) + c * c) % 7) as f64 - 3.0);
        let response = DVector::from_fn(12, |r, _| (r as f64 * 0.7).sin() * 2.0 + 1.0);
        let uncached = BvsModel::with_cache_capacity(design, response, 7.0, 0.3, 0).unwrap();
        for idx in 0..32 {
            let gamma = BinaryModel::from_index(idx, 5);
            for i in 0..5 {
                let a = cached.log_ratio_element(&gamma, i).unwrap();
                let b = uncached.log_ratio_element(&gamma, i).unwrap();
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        assert!(cached.cache.hits() > 0);
        assert!(uncached.cache.is_empty());
    }
}
