//! Random-walk Metropolis over adjusted posteriors and their tempered versions.

mod metropolis;
mod power;
mod proposal;
mod tune;

pub use metropolis::{log_acceptance, rw_metropolis, Chain, ChainSettings, GaussianStep};
pub use power::{run_power_posterior_chains, RungSamples};
pub use proposal::{default_lambda, proposal_covariance, ProposalSpec, TemperedScaling};
pub use tune::tune_lambda;
