//! Posterior evaluators for the binary-space samplers.
//!
//! Four applications of the `PosteriorModel` interface: a fully factorizable
//! toy posterior, Gaussian graphical models (marginal pseudo-likelihood),
//! Ising models (nodewise logistic BIC), and g-prior Bayesian variable
//! selection. Graph-structured models share the lexicographic edge-index
//! bijection in [`edges`] and the concurrent score cache in [`cache`].

pub mod bvs;
pub mod cache;
pub mod edges;
pub mod factorizable;
pub mod ggm;
pub mod ising;
pub mod logistic;

pub use bvs::{r_squared, BvsError, BvsModel};
pub use cache::ValueCache;
pub use edges::EdgeIndexer;
pub use factorizable::FactorizableModel;
pub use ggm::{GgmError, GgmModel};
pub use ising::{IsingError, IsingModel};
