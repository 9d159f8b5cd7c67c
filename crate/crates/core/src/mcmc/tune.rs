use nalgebra::DMatrix;

use crate::error::Result;
use crate::seeds::Rng;

use super::metropolis::{rw_metropolis, ChainSettings};

/// Bisection on `log λ` for a target acceptance rate, using short pilot runs
/// with proposal covariance `λ² · unit_cov`.
pub fn tune_lambda(
    target: &dyn Fn(&[f64]) -> f64,
    init: &[f64],
    unit_cov: &DMatrix<f64>,
    goal: f64,
    pilot: &ChainSettings,
    rounds: usize,
    rng: &mut Rng,
) -> Result<f64> {
    let (mut lo, mut hi) = ((1e-3f64).ln(), (1e2f64).ln());
    for _ in 0..rounds {
        let mid = 0.5 * (lo + hi);
        let lambda = mid.exp();
        let chain = rw_metropolis(target, init, &(unit_cov * (lambda * lambda)), pilot, rng)?;
        // acceptance falls as λ grows
        if chain.acceptance_rate() > goal {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::{stream, Phase};

    #[test]
    fn tuned_lambda_hits_goal() {
        let target = |x: &[f64]| -0.5 * x[0] * x[0];
        let pilot = ChainSettings { draws: 20_000, burn_in: 500 };
        let mut rng = stream(1, Phase::Tuning, 0, 0);
        let unit = DMatrix::identity(1, 1);
        let lambda = tune_lambda(&target, &[0.0], &unit, 0.25, &pilot, 14, &mut rng).unwrap();
        let check = rw_metropolis(&target, &[0.0], &(unit * lambda * lambda), &pilot, &mut rng).unwrap();
        assert!((check.acceptance_rate() - 0.25).abs() < 0.03, "{}", check.acceptance_rate());
    }
}
