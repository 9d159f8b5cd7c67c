//! Bayesian model evidence for Gibbs random fields.
//!
//! The likelihood of a Gibbs random field (an exponential random graph model
//! or a Potts lattice) carries a normalising constant that cannot be summed.
//! This crate replaces it with a *fully adjusted pseudolikelihood*: the
//! pseudolikelihood composed with an affine map that moves its mode onto the
//! maximum likelihood estimate and matches the likelihood curvature there,
//! then rescaled so that its height at that mode equals the likelihood. The
//! resulting posterior is tractable, so ordinary evidence estimators apply:
//! Chib–Jeliazkov, thermodynamic integration (plain and controlled), and
//! stepping stones.
//!
//! Module map:
//!
//! * [`model`] – parameter/statistic vectors, the [`model::GrfModel`] contract
//!   and brute-force enumeration oracles.
//! * [`ergm`] – undirected networks, ERGM terms, change statistics and the
//!   tie-no-tie sampler.
//! * [`potts`] – Potts/Ising lattices, exact forward–backward recursion and
//!   quadrature evidence.
//! * [`pseudolikelihood`] – log pseudolikelihood, derivatives and the MPLE.
//! * [`calibration`] – MC-MLE, likelihood moments, curvature matrix, path
//!   sampling of the normalising constant and the adjustment artifact.
//! * [`mcmc`] – random-walk Metropolis and power-posterior chains.
//! * [`evidence`] – the evidence estimators and Bayes factors.
//! * [`cli`] – configuration, reports and the command-line subcommands.

pub mod calibration;
pub mod cli;
pub mod error;
pub mod ergm;
pub mod evidence;
pub mod mcmc;
pub mod model;
pub mod numeric;
pub mod potts;
pub mod prior;
pub mod pseudolikelihood;
pub mod seeds;

pub use error::{Error, Result};
pub use model::{GrfModel, StatVector, Theta};
