use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Random-walk proposal `N(θ, λ²(B0 + C)⁻¹)`.
#[derive(Debug, Clone)]
pub struct ProposalSpec {
    pub lambda: f64,
    /// Prior precision `B0`.
    pub prior_precision: DMatrix<f64>,
    /// Negative Hessian of the log-likelihood at its mode.
    pub curvature: DMatrix<f64>,
}

/// The usual random-walk scale `2.38 / √d`.
pub fn default_lambda(dim: usize) -> f64 {
    2.38 / (dim as f64).sqrt()
}

pub fn proposal_covariance(spec: &ProposalSpec) -> Result<DMatrix<f64>> {
    if !(spec.lambda > 0.0 && spec.lambda.is_finite()) {
        return Err(Error::Invalid(format!("lambda must be positive, got {}", spec.lambda)));
    }
    if spec.prior_precision.shape() != spec.curvature.shape() || !spec.curvature.is_square() {
        return Err(Error::DimensionMismatch {
            expected: spec.prior_precision.nrows(),
            got: spec.curvature.nrows(),
        });
    }
    let sum = &spec.prior_precision + &spec.curvature;
    let sum = (&sum + sum.transpose()) * 0.5;
    let inv = sum
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("B0 + C is not invertible as a precision".into()))?
        .inverse();
    let cov = inv * (spec.lambda * spec.lambda);
    Ok((&cov + cov.transpose()) * 0.5)
}

/// Temperature-dependent proposal scaling. The covariance at temperature `t`
/// is `t^{−α} Σ_λ`, i.e. the proposal precision is `t^α τ_p`, with `α` chosen
/// so that at `t_1` it equals the prior precision `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperedScaling {
    pub alpha: f64,
    pub tau: f64,
    pub tau_p: f64,
    pub first_rung: f64,
}

impl TemperedScaling {
    /// `τ` is the smallest diagonal entry of `B0`, `τ_p` the smallest diagonal
    /// entry of `Σ_λ⁻¹`.
    pub fn new(prior_precision: &DMatrix<f64>, proposal_cov: &DMatrix<f64>, first_rung: f64) -> Result<Self> {
        if !(first_rung > 0.0 && first_rung < 1.0) {
            return Err(Error::Invalid(format!(
                "tempered scaling needs 0 < t_1 < 1, got {first_rung}"
            )));
        }
        let tau = prior_precision.diagonal().min();
        let prec = proposal_cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("proposal covariance".into()))?
            .inverse();
        let tau_p = prec.diagonal().min();
        let alpha = (tau / tau_p).ln() / first_rung.ln();
        Ok(Self {
            alpha,
            tau,
            tau_p,
            first_rung,
        })
    }

    /// Multiplier on `Σ_λ` at temperature `t`; the `t = 0` rung uses `t_1`.
    pub fn covariance_factor(&self, t: f64) -> f64 {
        let t = if t > 0.0 { t } else { self.first_rung };
        t.powf(-self.alpha)
    }
}
