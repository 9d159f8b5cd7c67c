//! Multivariate Gaussian prior on θ.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PriorSpec", into = "PriorSpec")]
pub struct GaussianPrior {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    precision: DMatrix<f64>,
    log_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PriorSpec {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

impl TryFrom<PriorSpec> for GaussianPrior {
    type Error = Error;
    fn try_from(p: PriorSpec) -> Result<Self> {
        let d = p.mean.len();
        if p.cov.len() != d || p.cov.iter().any(|r| r.len() != d) {
            return Err(Error::Invalid("prior covariance must be d x d".into()));
        }
        let cov = DMatrix::from_fn(d, d, |i, j| p.cov[i][j]);
        GaussianPrior::new(DVector::from_vec(p.mean), cov)
    }
}

impl From<GaussianPrior> for PriorSpec {
    fn from(p: GaussianPrior) -> Self {
        let d = p.dim();
        PriorSpec {
            mean: p.mean.iter().copied().collect(),
            cov: (0..d).map(|i| (0..d).map(|j| p.cov[(i, j)]).collect()).collect(),
        }
    }
}

impl PartialEq for GaussianPrior {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.cov == other.cov
    }
}

impl GaussianPrior {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 || cov.nrows() != d || cov.ncols() != d {
            return Err(Error::Invalid("prior mean/covariance dimensions disagree".into()));
        }
        let chol = cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("prior covariance".into()))?;
        let log_det: f64 = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
        let precision = chol.inverse();
        let log_norm = -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det);
        Ok(Self {
            mean,
            cov,
            precision,
            log_norm,
        })
    }

    /// `N(mean, variance·I)`.
    pub fn isotropic(mean: Vec<f64>, variance: f64) -> Result<Self> {
        let d = mean.len();
        Self::new(DVector::from_vec(mean), DMatrix::identity(d, d) * variance)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// `B0`, the prior precision.
    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn log_density(&self, theta: &[f64]) -> f64 {
        let diff = DVector::from_column_slice(theta) - &self.mean;
        self.log_norm - 0.5 * diff.dot(&(&self.precision * &diff))
    }

    pub fn gradient(&self, theta: &[f64]) -> DVector<f64> {
        let diff = DVector::from_column_slice(theta) - &self.mean;
        -(&self.precision * diff)
    }
}
