use nalgebra::DMatrix;
use rand::Rng as _;
use rayon::prelude::*;

use crate::calibration::{LogLikelihood, TemperatureLadder};
use crate::error::{Error, Result};
use crate::numeric::{mean, variance};
use crate::prior::GaussianPrior;
use crate::seeds::{stream, Phase};

use super::metropolis::{log_acceptance, ChainSettings, GaussianStep};
use super::proposal::TemperedScaling;

/// Draws from one power posterior `π_t(θ|y) ∝ L(θ)^t p(θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RungSamples {
    pub t: f64,
    pub dim: usize,
    /// `T × d`, row-major.
    pub draws: Vec<f64>,
    /// `log L(θ)` at every draw.
    pub log_lik: Vec<f64>,
    /// `∇ log π_t(θ) = t ∇ log L(θ) + ∇ log p(θ)` at every draw, `T × d`.
    pub score: Vec<f64>,
    pub acceptance_rate: f64,
}

impl RungSamples {
    pub fn len(&self) -> usize {
        self.log_lik.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_lik.is_empty()
    }

    pub fn draw(&self, i: usize) -> &[f64] {
        &self.draws[i * self.dim..(i + 1) * self.dim]
    }

    pub fn score_at(&self, i: usize) -> &[f64] {
        &self.score[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mean_log_lik(&self) -> f64 {
        mean(&self.log_lik)
    }

    pub fn var_log_lik(&self) -> f64 {
        variance(&self.log_lik)
    }
}

fn run_rung(
    lik: &dyn LogLikelihood,
    prior: &GaussianPrior,
    t: f64,
    step: &GaussianStep,
    init: &[f64],
    settings: &ChainSettings,
    rng: &mut crate::seeds::Rng,
) -> Result<RungSamples> {
    let d = init.len();
    let mut current = init.to_vec();
    let mut current_ll = lik.log_likelihood(&current);
    let mut current_lp = t * current_ll + prior.log_density(&current);
    if !current_lp.is_finite() {
        return Err(Error::Invalid(format!("rung t={t}: target undefined at the initial value")));
    }
    let mut grad = vec![0.0; d];
    let mut grad_valid = false;
    let mut cand = vec![0.0; d];
    let total = settings.burn_in + settings.draws;
    let mut out = RungSamples {
        t,
        dim: d,
        draws: Vec::with_capacity(settings.draws * d),
        log_lik: Vec::with_capacity(settings.draws),
        score: Vec::with_capacity(settings.draws * d),
        acceptance_rate: 0.0,
    };
    let mut accepted = 0usize;
    for it in 0..total {
        step.propose(&current, rng, &mut cand);
        let ll = lik.log_likelihood(&cand);
        let lp = t * ll + prior.log_density(&cand);
        let u: f64 = rng.gen();
        if u.ln() < log_acceptance(current_lp, lp) {
            std::mem::swap(&mut current, &mut cand);
            current_ll = ll;
            current_lp = lp;
            grad_valid = false;
            if it >= settings.burn_in {
                accepted += 1;
            }
        }
        if it >= settings.burn_in {
            if !grad_valid {
                lik.value_and_gradient(&current, &mut grad);
                let pg = prior.gradient(&current);
                for (g, p) in grad.iter_mut().zip(pg.iter()) {
                    *g = t * *g + p;
                }
                grad_valid = true;
            }
            out.draws.extend_from_slice(&current);
            out.log_lik.push(current_ll);
            out.score.extend_from_slice(&grad);
        }
    }
    out.acceptance_rate = accepted as f64 / settings.draws.max(1) as f64;
    Ok(out)
}

/// One random-walk chain per ladder temperature. Rung `i` of replicate `r`
/// uses its own RNG stream and a proposal covariance
/// `scaling.covariance_factor(t_i) · Σ_λ`, so the output does not depend on
/// the order in which rungs run.
#[allow(clippy::too_many_arguments)]
pub fn run_power_posterior_chains(
    lik: &dyn LogLikelihood,
    prior: &GaussianPrior,
    ladder: &TemperatureLadder,
    proposal_cov: &DMatrix<f64>,
    init: &[f64],
    settings: &ChainSettings,
    seed: u64,
    replicate: u64,
) -> Result<Vec<RungSamples>> {
    let d = lik.dim();
    crate::model::check_dim(d, init.len())?;
    crate::model::check_dim(d, prior.dim())?;
    let t = ladder.points();
    let scaling = TemperedScaling::new(prior.precision(), proposal_cov, t[1])?;
    (0..t.len())
        .into_par_iter()
        .map(|i| {
            let step = GaussianStep::new(&(proposal_cov * scaling.covariance_factor(t[i])))?;
            let mut rng = stream(seed, Phase::PowerPosterior, replicate, i as u64);
            run_rung(lik, prior, t[i], &step, init, settings, &mut rng)
        })
        .collect()
}
