//! Model-agnostic pieces of a Gibbs random field: `f(y|θ) = exp{θᵀs(y)} / z(θ)`.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, LogAccumulator};
use crate::seeds::Rng;

/// Default cap on the number of configurations an exhaustive loop may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 22;

/// Natural parameter vector of a GRF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Theta(Vec<f64>);

/// Sufficient statistics `s(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StatVector(Vec<f64>);

macro_rules! real_vector {
    ($ty:ident, $what:literal) => {
        impl $ty {
            pub fn new(values: Vec<f64>) -> Result<Self> {
                if values.is_empty() {
                    return Err(Error::Invalid(concat!($what, " must have length >= 1").into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite($what));
                }
                Ok(Self(values))
            }

            pub fn zeros(d: usize) -> Self {
                Self(vec![0.0; d])
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.0
            }

            pub fn to_dvector(&self) -> DVector<f64> {
                DVector::from_column_slice(&self.0)
            }

            pub fn from_dvector(v: &DVector<f64>) -> Result<Self> {
                Self::new(v.iter().copied().collect())
            }
        }

        impl Deref for $ty {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl From<$ty> for Vec<f64> {
            fn from(v: $ty) -> Vec<f64> {
                v.0
            }
        }
    };
}

real_vector!(Theta, "theta");
real_vector!(StatVector, "statistic vector");

impl StatVector {
    /// Builds a vector without the finiteness check; for hot loops whose
    /// inputs are finite by construction.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl Theta {
    pub fn scaled(&self, t: f64) -> Theta {
        Theta(self.0.iter().map(|v| v * t).collect())
    }
}

pub fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// A discrete exponential-family random field.
pub trait GrfModel {
    type State;

    /// Statistic dimension `d`.
    fn dim(&self) -> usize;

    fn stats(&self, y: &Self::State) -> StatVector;

    /// `log |Y|`, i.e. `log z(0)`.
    fn log_state_count(&self) -> f64;

    /// Visits every configuration once. Callers check the size first.
    fn for_each_state(&self, visit: &mut dyn FnMut(&Self::State));
}

/// Draws statistics from `f(·|θ)`; the only access to the likelihood that
/// the calibration phases need.
pub trait LikelihoodSampler: Sync {
    fn dim(&self) -> usize;

    /// `log z(0)`, the log number of configurations.
    fn log_z_zero(&self) -> f64;

    /// `count` statistic vectors from (approximately) independent draws.
    fn sample_stats(&self, theta: &Theta, count: usize, rng: &mut Rng) -> Result<Vec<StatVector>>;
}

/// Un-normalised log-likelihood `θᵀ s(y)`.
pub fn log_unnorm<M: GrfModel>(model: &M, y: &M::State, theta: &Theta) -> Result<f64> {
    check_dim(model.dim(), theta.dim())?;
    Ok(dot(theta, &model.stats(y)))
}

fn check_enumerable<M: GrfModel>(model: &M, cap: u64) -> Result<()> {
    let required = model.log_state_count().exp();
    if required > cap as f64 {
        return Err(Error::EnumerationCap { required, cap });
    }
    Ok(())
}

/// `log z(θ)` by visiting every configuration.
pub fn brute_force_log_partition<M: GrfModel>(model: &M, theta: &Theta, cap: u64) -> Result<f64> {
    check_dim(model.dim(), theta.dim())?;
    check_enumerable(model, cap)?;
    let mut acc = LogAccumulator::default();
    model.for_each_state(&mut |y| acc.add(dot(theta, &model.stats(y))));
    Ok(acc.value())
}

/// Exact mean and covariance of `s(y)` under `f(·|θ)` by enumeration.
pub fn brute_force_moments<M: GrfModel>(
    model: &M,
    theta: &Theta,
    cap: u64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let log_z = brute_force_log_partition(model, theta, cap)?;
    let d = model.dim();
    let mut mean = DVector::zeros(d);
    let mut second = DMatrix::zeros(d, d);
    model.for_each_state(&mut |y| {
        let s = model.stats(y).to_dvector();
        let p = (theta.to_dvector().dot(&s) - log_z).exp();
        mean += &s * p;
        second += &s * s.transpose() * p;
    });
    let cov = second - &mean * mean.transpose();
    Ok((mean, cov))
}
