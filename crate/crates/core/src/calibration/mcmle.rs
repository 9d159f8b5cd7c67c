//! Monte Carlo maximum likelihood by importance-sampled likelihood ratios.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_dim, LikelihoodSampler, StatVector, Theta};
use crate::seeds::{stream, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McmleSettings {
    /// Simulated statistics per iteration (`K`).
    pub draws: usize,
    /// Maximum outer iterations (`R`).
    pub iterations: usize,
    /// Stop when successive iterates differ by less than this in max norm.
    pub tol: f64,
    /// Minimum effective sample size as a fraction of `draws`.
    pub min_ess_fraction: f64,
}

impl Default for McmleSettings {
    fn default() -> Self {
        Self {
            draws: 1500,
            iterations: 20,
            tol: 1e-4,
            min_ess_fraction: 0.02,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McmleResult {
    pub theta: Theta,
    pub iterations: usize,
    pub converged: bool,
    /// Effective sample size of the importance weights at the final step.
    pub final_ess: f64,
}

/// Importance weights `w_k ∝ exp{Δᵀ(s_k − s_obs)}`, normalised; returns ESS.
fn weights(centered: &[DVector<f64>], delta: &DVector<f64>, out: &mut Vec<f64>) -> f64 {
    out.clear();
    out.extend(centered.iter().map(|s| delta.dot(s)));
    let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for w in out.iter_mut() {
        *w = (*w - max).exp();
        sum += *w;
    }
    let mut sq = 0.0;
    for w in out.iter_mut() {
        *w /= sum;
        sq += *w * *w;
    }
    1.0 / sq
}

/// Maximises `ℓ(Δ) = −log (1/K) Σ_k exp{Δᵀ(s_k − s_obs)}`, the Monte Carlo
/// log-likelihood ratio `log f(y|θ_r+Δ) − log f(y|θ_r)`, by Newton's method
/// with backtracking. The objective is concave.
fn maximise_ratio(centered: &[DVector<f64>], d: usize) -> DVector<f64> {
    let objective = |delta: &DVector<f64>| {
        let e: Vec<f64> = centered.iter().map(|s| delta.dot(s)).collect();
        -crate::numeric::log_mean_exp(&e)
    };
    let mut delta = DVector::zeros(d);
    let mut value = objective(&delta);
    let mut w = Vec::new();
    for _ in 0..100 {
        weights(centered, &delta, &mut w);
        let mut mean = DVector::zeros(d);
        for (s, wk) in centered.iter().zip(&w) {
            mean += s * *wk;
        }
        let mut cov = DMatrix::zeros(d, d);
        for (s, wk) in centered.iter().zip(&w) {
            let c = s - &mean;
            cov += &c * c.transpose() * *wk;
        }
        let grad = -&mean;
        if grad.amax() < 1e-10 {
            break;
        }
        let step = match cov.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => grad.clone(),
        };
        let mut scale = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let cand = &delta + &step * scale;
            let v = objective(&cand);
            if v.is_finite() && v >= value {
                delta = cand;
                value = v;
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        if !moved {
            break;
        }
        // observed statistics outside the sample hull: the maximiser is at
        // infinity; stop and let the ESS guard shorten the step
        if delta.amax() > 1e3 {
            break;
        }
    }
    delta
}

/// Geyer–Thompson MC-MLE. Each iteration simulates `K` statistic vectors at
/// the current iterate and moves to the maximiser of the importance-sampled
/// likelihood ratio. A step whose weights have ESS below
/// `min_ess_fraction · K` is halved until the ESS recovers; if the last
/// iteration still needed such damping the estimate is rejected.
pub fn mcmle(
    sampler: &dyn LikelihoodSampler,
    observed: &StatVector,
    init: &Theta,
    settings: &McmleSettings,
    seed: u64,
) -> Result<McmleResult> {
    let d = sampler.dim();
    check_dim(d, init.dim())?;
    check_dim(d, observed.dim())?;
    if settings.draws < 2 || settings.iterations == 0 {
        return Err(Error::Invalid("MC-MLE needs draws >= 2 and iterations >= 1".into()));
    }
    let obs = observed.to_dvector();
    let min_ess = settings.min_ess_fraction * settings.draws as f64;
    let mut theta = init.to_dvector();
    let mut w = Vec::new();
    let mut consecutive_degenerate = 0;
    let mut last_ess = settings.draws as f64;
    for r in 0..settings.iterations {
        let mut rng = stream(seed, Phase::Mcmle, 0, r as u64);
        let draws = sampler.sample_stats(&Theta::from_dvector(&theta)?, settings.draws, &mut rng)?;
        let centered: Vec<DVector<f64>> = draws.iter().map(|s| s.to_dvector() - &obs).collect();
        let mut delta = maximise_ratio(&centered, d);
        let mut ess = weights(&centered, &delta, &mut w);
        let degenerate = ess < min_ess;
        let mut halvings = 0;
        while ess < min_ess && halvings < 60 {
            delta *= 0.5;
            ess = weights(&centered, &delta, &mut w);
            halvings += 1;
        }
        consecutive_degenerate = if degenerate { consecutive_degenerate + 1 } else { 0 };
        last_ess = ess;
        theta += &delta;
        if !degenerate && delta.amax() < settings.tol {
            return Ok(McmleResult {
                theta: Theta::from_dvector(&theta)?,
                iterations: r + 1,
                converged: true,
                final_ess: ess,
            });
        }
    }
    if consecutive_degenerate > 0 {
        return Err(Error::DegenerateWeights {
            attempts: consecutive_degenerate,
            ess: last_ess,
            draws: settings.draws,
        });
    }
    Ok(McmleResult {
        theta: Theta::from_dvector(&theta)?,
        iterations: settings.iterations,
        converged: false,
        final_ess: last_ess,
    })
}
