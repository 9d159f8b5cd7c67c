use rayon::prelude::*;

use crate::error::Result;
use crate::model::{check_dim, LikelihoodSampler, Theta};
use crate::numeric::{dot, log_mean_exp};
use crate::seeds::{stream, Phase};

use super::ladder::TemperatureLadder;

/// Path-sampling estimate of `log z(θ)`:
///
/// `log ẑ(θ) = log z(0) + Σ_j log (1/K) Σ_k exp{(t_{j+1} − t_j) θᵀ s(y_k^{(j)})}`
///
/// with `y_k^{(j)} ~ f(·|t_j θ)`. Rung `j` draws from its own RNG stream and the
/// rung terms are summed in ladder order, so the result does not depend on
/// how rungs are scheduled.
pub fn estimate_log_partition_path(
    sampler: &dyn LikelihoodSampler,
    theta: &Theta,
    ladder: &TemperatureLadder,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    check_dim(sampler.dim(), theta.dim())?;
    let t = ladder.points();
    let terms: Vec<f64> = (0..ladder.intervals())
        .into_par_iter()
        .map(|j| -> Result<f64> {
            let mut rng = stream(seed, Phase::PathSampling, 0, j as u64);
            let stats = sampler.sample_stats(&theta.scaled(t[j]), draws, &mut rng)?;
            let gap = t[j + 1] - t[j];
            let e: Vec<f64> = stats.iter().map(|s| gap * dot(theta, s)).collect();
            Ok(log_mean_exp(&e))
        })
        .collect::<Result<_>>()?;
    Ok(sampler.log_z_zero() + terms.iter().sum::<f64>())
}
