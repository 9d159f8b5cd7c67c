use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{check_dim, LikelihoodSampler, StatVector, Theta};
use crate::seeds::Rng;

/// Sample mean and (unbiased) covariance of statistic vectors.
pub fn sample_moments(draws: &[StatVector]) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let k = draws.len();
    let d = draws.first().map_or(0, |s| s.dim());
    if k < d + 1 {
        return Err(Error::Invalid(format!("need at least d+1 = {} draws, got {k}", d + 1)));
    }
    let mut mean = DVector::zeros(d);
    for s in draws {
        mean += s.to_dvector();
    }
    mean /= k as f64;
    let mut cov = DMatrix::zeros(d, d);
    for s in draws {
        let c = s.to_dvector() - &mean;
        cov += &c * c.transpose();
    }
    cov /= (k - 1) as f64;
    Ok((mean, cov))
}

/// Monte Carlo estimates of `E[s(y)]` and `V[s(y)]` under `f(·|θ)`; these give
/// `∇ log f(y|θ) = s(y) − E[s]` and `∇² log f(y|θ) = −V[s]`.
pub fn estimate_moments(
    sampler: &dyn LikelihoodSampler,
    theta: &Theta,
    draws: usize,
    rng: &mut Rng,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_dim(sampler.dim(), theta.dim())?;
    let d = sampler.dim();
    if draws < d + 1 {
        return Err(Error::Invalid(format!("need at least d+1 = {} draws", d + 1)));
    }
    let sample = sampler.sample_stats(theta, draws, rng)?;
    let (mean, cov) = sample_moments(&sample)?;
    let scale = cov.diagonal().amax().max(1e-300);
    let eig = cov.clone().symmetric_eigen();
    let min = eig.eigenvalues.min();
    if !(min > 1e-10 * scale) {
        return Err(Error::SingularCovariance(format!(
            "smallest eigenvalue {min:.3e} against largest variance {scale:.3e} over {draws} draws"
        )));
    }
    Ok((mean, cov))
}
