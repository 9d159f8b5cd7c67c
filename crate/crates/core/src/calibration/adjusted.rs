use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::check_dim;
use crate::pseudolikelihood::PlSurface;

use super::artifact::AdjustmentArtifact;

/// A log-likelihood surrogate with an analytic gradient.
pub trait LogLikelihood: Sync {
    fn dim(&self) -> usize;

    fn log_likelihood(&self, theta: &[f64]) -> f64;

    /// Writes `∇ log L(θ)` into `grad` and returns `log L(θ)`.
    fn value_and_gradient(&self, theta: &[f64], grad: &mut [f64]) -> f64;
}

/// The fully adjusted pseudolikelihood of one artifact and its surface.
#[derive(Debug, Clone)]
pub struct AdjustedLikelihood {
    surface: PlSurface,
    log_c: f64,
    mple: DVector<f64>,
    mle: DVector<f64>,
    w: DMatrix<f64>,
}

impl AdjustedLikelihood {
    pub fn new(artifact: &AdjustmentArtifact, surface: PlSurface) -> Result<Self> {
        check_dim(artifact.dim(), surface.dim())?;
        Ok(Self {
            surface,
            log_c: artifact.log_c,
            mple: artifact.theta_mple.to_dvector(),
            mle: artifact.theta_mle.to_dvector(),
            w: artifact.w_matrix(),
        })
    }

    /// The unadjusted pseudolikelihood (`W = I`, `C = 1`, both modes at the MPLE).
    pub fn unadjusted(surface: PlSurface) -> Self {
        let d = surface.dim();
        Self {
            surface,
            log_c: 0.0,
            mple: DVector::zeros(d),
            mle: DVector::zeros(d),
            w: DMatrix::identity(d, d),
        }
    }

    pub fn surface(&self) -> &PlSurface {
        &self.surface
    }

    pub fn log_c(&self) -> f64 {
        self.log_c
    }

    fn map(&self, theta: &[f64]) -> DVector<f64> {
        &self.mple + &self.w * (DVector::from_column_slice(theta) - &self.mle)
    }

    /// `∇² log f̃(θ) = Wᵀ ∇² log PL(g(θ)) W`.
    pub fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        let h = self.surface.hessian(self.map(theta).as_slice());
        self.w.transpose() * h * &self.w
    }
}

impl LogLikelihood for AdjustedLikelihood {
    fn dim(&self) -> usize {
        self.surface.dim()
    }

    fn log_likelihood(&self, theta: &[f64]) -> f64 {
        self.log_c + self.surface.log_pl(self.map(theta).as_slice())
    }

    fn value_and_gradient(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let mut inner = vec![0.0; grad.len()];
        let v = self.surface.value_and_gradient(self.map(theta).as_slice(), &mut inner);
        let g = self.w.transpose() * DVector::from_vec(inner);
        grad.copy_from_slice(g.as_slice());
        self.log_c + v
    }
}

/// `log f̃(y|θ)` for one parameter value.
pub fn adjusted_log_likelihood(artifact: &AdjustmentArtifact, surface: &PlSurface, theta: &[f64]) -> Result<f64> {
    check_dim(artifact.dim(), surface.dim())?;
    check_dim(artifact.dim(), theta.len())?;
    let v = artifact.log_c + surface.log_pl(artifact.map(theta).as_slice());
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("adjusted log-likelihood"))
    }
}
