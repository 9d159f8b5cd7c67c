use nalgebra::{DMatrix, DVector};

use crate::calibration::LogLikelihood;
use crate::error::{Error, Result};
use crate::mcmc::{log_acceptance, rw_metropolis, ChainSettings, GaussianStep};
use crate::numeric::{log_mean_exp, LogAccumulator};
use crate::prior::GaussianPrior;
use crate::seeds::Rng;

/// Log density of `N(x; mean, Σ)` given the lower Cholesky factor of `Σ`.
struct GaussianKernel {
    factor: DMatrix<f64>,
    log_norm: f64,
}

impl GaussianKernel {
    fn new(cov: &DMatrix<f64>) -> Result<Self> {
        let l = cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("proposal covariance".into()))?
            .l();
        let d = cov.nrows() as f64;
        let log_det: f64 = l.diagonal().iter().map(|v| 2.0 * v.ln()).sum();
        Ok(Self {
            factor: l,
            log_norm: -0.5 * (d * (2.0 * std::f64::consts::PI).ln() + log_det),
        })
    }

    fn log_density(&self, x: &[f64], mean: &[f64]) -> f64 {
        let diff = DVector::from_iterator(x.len(), x.iter().zip(mean).map(|(a, b)| a - b));
        let z = self
            .factor
            .solve_lower_triangular(&diff)
            .expect("Cholesky factor has a positive diagonal");
        self.log_norm - 0.5 * z.norm_squared()
    }
}

/// Outcome of a single Chib–Jeliazkov run.
#[derive(Debug, Clone)]
pub struct ChibOutcome {
    pub log_evidence: f64,
    pub theta_star: Vec<f64>,
    pub log_ordinate: f64,
    pub acceptance_rate: f64,
}

/// One-block Chib–Jeliazkov estimate from a random-walk Metropolis run with
/// proposal covariance `proposal_cov`:
///
/// `log π(y) = log L(θ*) + log p(θ*) − log π̂(θ*|y)`, where `π̂(θ*|y)` is the
/// ratio of `mean_i α(θ_i, θ*) q(θ*|θ_i)` over posterior draws to
/// `mean_j α(θ*, θ_j)` over `θ_j ~ q(·|θ*)`. `θ*` defaults to the posterior
/// sample mean.
#[allow(clippy::too_many_arguments)]
pub fn chib_jeliazkov(
    lik: &dyn LogLikelihood,
    prior: &GaussianPrior,
    proposal_cov: &DMatrix<f64>,
    init: &[f64],
    theta_star: Option<&[f64]>,
    chain: &ChainSettings,
    proposal_draws: usize,
    rng: &mut Rng,
) -> Result<ChibOutcome> {
    let target = |th: &[f64]| lik.log_likelihood(th) + prior.log_density(th);
    let posterior = rw_metropolis(&target, init, proposal_cov, chain, rng)?;
    let star = theta_star.map_or_else(|| posterior.mean(), |s| s.to_vec());
    crate::model::check_dim(lik.dim(), star.len())?;
    let star_lp = target(&star);
    if !star_lp.is_finite() {
        return Err(Error::Invalid("posterior density is zero at the chosen ordinate point".into()));
    }
    let kernel = GaussianKernel::new(proposal_cov)?;

    let mut numerator = LogAccumulator::default();
    for (th, &lp) in posterior.draws().zip(posterior.log_density()) {
        let log_alpha = log_acceptance(lp, star_lp);
        numerator.add(log_alpha + kernel.log_density(&star, th));
    }
    let log_num = numerator.value() - (posterior.len() as f64).ln();

    let step = GaussianStep::new(proposal_cov)?;
    let mut cand = vec![0.0; star.len()];
    let mut log_alphas = Vec::with_capacity(proposal_draws);
    for _ in 0..proposal_draws {
        step.propose(&star, rng, &mut cand);
        log_alphas.push(log_acceptance(star_lp, target(&cand)));
    }
    let log_den = log_mean_exp(&log_alphas);
    if !log_den.is_finite() {
        return Err(Error::Underflow(
            "no proposal from the ordinate point was ever accepted; choose θ* closer to the posterior mode".into(),
        ));
    }
    let log_ordinate = log_num - log_den;
    Ok(ChibOutcome {
        log_evidence: star_lp - log_ordinate,
        theta_star: star,
        log_ordinate,
        acceptance_rate: posterior.acceptance_rate(),
    })
}
