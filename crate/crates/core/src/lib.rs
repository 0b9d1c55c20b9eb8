//! Beta-Binomial stick-breaking (BBSB) priors.
//!
//! The length variables of a stick-breaking prior are driven by a
//! Beta-Binomial Markov chain with dependence parameter `kappa`: `kappa = 0`
//! with `alpha = 1` is the Dirichlet process and `kappa -> inf` the Geometric
//! process. The crate provides the chain, the stick-breaking construction,
//! prior simulation of the number of groups, a slice-Gibbs sampler for
//! univariate Gaussian mixtures (with optional random `kappa`), and a
//! Pitman-Yor baseline sharing the same machinery.

pub mod baselines;
pub mod chain;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod mixture;
pub mod sampling;
pub mod special;
pub mod stickbreak;

pub use chain::{BbsbParams, Kappa};
pub use error::{Error, Result};
