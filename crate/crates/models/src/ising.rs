//! Ising graph structure via nodewise logistic pseudo-likelihood.
//!
//! The marginal likelihood factorizes nodewise, p(y|G) ≈ Π_i p_i(G), and
//! each node term is approximated through the (extended) BIC of the
//! maximum-likelihood logistic regression of y_i on its neighbors:
//! log p_i(G) ≈ −BIC_i/2 with
//!   BIC_i = −2·loglik + (d+1)·ln n + 2·γ_ebic·d·ln(p−1),
//! where d is the neighbor count (the intercept is always included). An edge
//! flip touches only the two endpoint terms.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::cache::{hash128, ValueCache, DEFAULT_CACHE_CAPACITY};
use crate::edges::{toggled_neighbors, EdgeIndexer};
use crate::logistic::fit_logistic;
use mjmc_core::{BinaryModel, EvalError, PosteriorModel, RATE_FLOOR};

const ISING_SALT: u64 = 0x151;

#[derive(Debug, Clone, Error)]
pub enum IsingError {
    #[error("entry at row {row}, column {col} is {value}, not 0/1")]
    NonBinaryEntry { row: usize, col: usize, value: f64 },
    #[error("logistic fit for node {node} did not converge (separation?)")]
    FitDiverged { node: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub struct IsingModel {
    data: DMatrix<f64>,
    edges: EdgeIndexer,
    prior_density: f64,
    ebic_gamma: f64,
    cache: ValueCache,
    floored_moves: AtomicU64,
}

impl IsingModel {
    pub fn new(
        data: DMatrix<f64>,
        prior_density: f64,
        ebic_gamma: f64,
    ) -> Result<Self, IsingError> {
        Self::with_cache_capacity(data, prior_density, ebic_gamma, DEFAULT_CACHE_CAPACITY)
    }

    pub fn with_cache_capacity(
        data: DMatrix<f64>,
        prior_density: f64,
        ebic_gamma: f64,
        cache_capacity: usize,
    ) -> Result<Self, IsingError> {
        if data.ncols() < 2 || data.nrows() < 2 {
            return Err(IsingError::InvalidParameter(
                "need at least 2 variables and 2 observations".into(),
            ));
        }
        for col in 0..data.ncols() {
            for row in 0..data.nrows() {
                let v = data[(row, col)];
                if v != 0.0 && v != 1.0 {
                    return Err(IsingError::NonBinaryEntry { row, col, value: v });
                }
            }
        }
        if !(prior_density > 0.0 && prior_density < 1.0) {
            return Err(IsingError::InvalidParameter(format!(
                "prior edge density {} outside (0, 1)",
                prior_density
            )));
        }
        if ebic_gamma < 0.0 {
            return Err(IsingError::InvalidParameter(format!(
                "ebic gamma {} must be non-negative",
                ebic_gamma
            )));
        }
        let edges = EdgeIndexer::new(data.ncols());
        let cache = if cache_capacity == 0 {
            ValueCache::disabled()
        } else {
            ValueCache::new(cache_capacity)
        };
        Ok(Self {
            data,
            edges,
            prior_density,
            ebic_gamma,
            cache,
            floored_moves: AtomicU64::new(0),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.data.ncols()
    }

    pub fn edge_indexer(&self) -> &EdgeIndexer {
        &self.edges
    }

    /// Moves whose proposed neighborhood failed to fit and were floored.
    pub fn floored_moves(&self) -> u64 {
        self.floored_moves.load(Ordering::Relaxed)
    }

    /// log p_node(G) ≈ −EBIC/2 for the given neighbor set, cached.
    pub fn log_node_marginal(&self, node: usize, nbrs: &[u32]) -> Result<f64, IsingError> {
        let key = hash128(ISING_SALT, node as u64, nbrs);
        self.cache
            .get_or_try_insert(key, || self.ebic_score(node, nbrs).map(|b| -0.5 * b))
    }

    /// EBIC of the logistic regression of `node` on `nbrs` (plus intercept).
    pub fn ebic_score(&self, node: usize, nbrs: &[u32]) -> Result<f64, IsingError> {
        let n = self.data.nrows();
        let d = nbrs.len();
        let mut x = DMatrix::zeros(n, d + 1);
        x.column_mut(0).fill(1.0);
        for (c, &nb) in nbrs.iter().enumerate() {
            x.set_column(c + 1, &self.data.column(nb as usize));
        }
        let y = DVector::from_column_slice(self.data.column(node).as_slice());
        let fit = fit_logistic(&x, &y).map_err(|_| IsingError::FitDiverged { node })?;
        let p_others = (self.vertex_count() - 1) as f64;
        Ok(-2.0 * fit.log_likelihood
            + (d as f64 + 1.0) * (n as f64).ln()
            + 2.0 * self.ebic_gamma * d as f64 * p_others.ln())
    }

    /// log(p(G^e | y) / p(G | y)) for flipping edge `e`. A diverging fit on a
    /// *proposed* neighborhood floors the ratio (the move is effectively
    /// rejected, keeping rates strictly positive); a diverging fit on the
    /// current graph is a real error.
    pub fn log_ratio_edge(&self, g: &BinaryModel, e: usize) -> Result<f64, IsingError> {
        let (i, j) = self.edges.pair_of(e);
        let (i, j) = (i as usize, j as usize);
        let adding = !g.get(e);
        let nb_i = self.edges.neighbors(i, g);
        let nb_j = self.edges.neighbors(j, g);
        let cur = self.log_node_marginal(i, &nb_i)? + self.log_node_marginal(j, &nb_j)?;
        let nb_i_flip = toggled_neighbors(&nb_i, j as u32, adding);
        let nb_j_flip = toggled_neighbors(&nb_j, i as u32, adding);
        let flipped = match (
            self.log_node_marginal(i, &nb_i_flip),
            self.log_node_marginal(j, &nb_j_flip),
        ) {
            (Ok(a), Ok(b)) => a + b,
            (Err(IsingError::FitDiverged { .. }), _) | (_, Err(IsingError::FitDiverged { .. })) => {
                self.floored_moves.fetch_add(1, Ordering::Relaxed);
                return Ok(RATE_FLOOR.ln());
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let prior = (self.prior_density / (1.0 - self.prior_density)).ln();
        Ok(flipped - cur + if adding { prior } else { -prior })
    }
}

impl PosteriorModel<f64> for IsingModel {
    fn dim(&self) -> usize {
        self.edges.edge_count()
    }

    fn log_ratio(&self, m: &BinaryModel, index: usize) -> Result<f64, EvalError> {
        self.log_ratio_edge(m, index)
            .map_err(|e| EvalError::evaluation(index, e.to_string()))
    }
}
