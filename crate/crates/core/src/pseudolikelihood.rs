//! Log pseudolikelihood `Σ_i log p(y_i | y_{-i}, θ)` and its derivatives.
//!
//! Every full conditional of a GRF is a multinomial logit: variable `i` can
//! take one of `A` values, value `a` contributes `θᵀ x_{i,a}` to the energy,
//! and `p(y_i = a | y_{-i}) ∝ exp{θᵀ x_{i,a}}`. For an ERGM dyad the two
//! alternatives are "no edge" (`x = 0`) and "edge" (`x = δ_s(y)_ij`); for a
//! Potts site `x_{i,s}` is the number of neighbours in state `s`. Identical
//! rows are merged with a multiplicity weight, which shrinks a Karate-sized
//! surface from 561 dyads to a few dozen rows.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::ergm::{ErgmModel, NetworkGraph};
use crate::error::{Error, Result};
use crate::model::{check_dim, Theta};
use crate::numeric::{log1p_exp, logistic};
use crate::potts::Lattice;

#[derive(Debug, Clone)]
pub struct PlSurface {
    dim: usize,
    alternatives: usize,
    /// `rows × alternatives × dim`, row-major.
    features: Vec<f64>,
    observed: Vec<u32>,
    weights: Vec<f64>,
    /// Two alternatives with the first identically zero.
    logistic: bool,
}

impl PlSurface {
    /// Builds a surface from uncompressed rows: `(alternative features, observed index)`.
    pub fn from_rows(dim: usize, alternatives: usize, rows: impl IntoIterator<Item = (Vec<f64>, u32)>) -> Result<Self> {
        if alternatives < 2 {
            return Err(Error::Invalid("a full conditional needs at least two alternatives".into()));
        }
        let mut merged: BTreeMap<(Vec<u64>, u32), f64> = BTreeMap::new();
        for (feat, obs) in rows {
            if feat.len() != dim * alternatives || obs as usize >= alternatives {
                return Err(Error::DimensionMismatch {
                    expected: dim * alternatives,
                    got: feat.len(),
                });
            }
            let key = feat.iter().map(|v| v.to_bits()).collect();
            *merged.entry((key, obs)).or_insert(0.0) += 1.0;
        }
        let mut features = Vec::with_capacity(merged.len() * dim * alternatives);
        let mut observed = Vec::with_capacity(merged.len());
        let mut weights = Vec::with_capacity(merged.len());
        for ((key, obs), w) in merged {
            features.extend(key.into_iter().map(f64::from_bits));
            observed.push(obs);
            weights.push(w);
        }
        let logistic = alternatives == 2
            && features
                .chunks(2 * dim)
                .all(|row| row[..dim].iter().all(|&v| v == 0.0));
        Ok(Self {
            dim,
            alternatives,
            features,
            observed,
            weights,
            logistic,
        })
    }

    /// One logistic row per dyad `i < j`, with the change statistics as covariates.
    pub fn ergm(model: &ErgmModel, g: &NetworkGraph) -> Result<Self> {
        let d = model.spec().dim();
        let n = g.node_count();
        let mut delta = vec![0.0; d];
        let mut rows = Vec::with_capacity(g.dyad_count());
        for i in 0..n {
            for j in i + 1..n {
                model.change_stats_into(g, i, j, &mut delta);
                let mut feat = vec![0.0; d];
                feat.extend_from_slice(&delta);
                rows.push((feat, g.has_edge(i, j) as u32));
            }
        }
        Self::from_rows(d, 2, rows)
    }

    /// One multinomial row per site; alternative `s` is the count of
    /// neighbours in state `s`.
    pub fn potts(l: &Lattice) -> Result<Self> {
        let rows: Vec<(Vec<f64>, u32)> = (0..l.len())
            .map(|site| {
                let counts = l.neighbor_counts(site).into_iter().map(f64::from).collect();
                (counts, l.cells()[site] as u32 - 1)
            })
            .collect();
        Self::from_rows(1, l.states() as usize, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of distinct rows after merging.
    pub fn row_count(&self) -> usize {
        self.weights.len()
    }

    /// Total number of full conditionals represented.
    pub fn variable_count(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn row(&self, r: usize) -> &[f64] {
        let len = self.dim * self.alternatives;
        &self.features[r * len..(r + 1) * len]
    }

    pub fn log_pl(&self, theta: &[f64]) -> f64 {
        debug_assert_eq!(theta.len(), self.dim);
        let d = self.dim;
        let mut total = 0.0;
        let mut eta = vec![0.0; self.alternatives];
        for (r, (&w, &obs)) in self.weights.iter().zip(&self.observed).enumerate() {
            let row = self.row(r);
            if self.logistic {
                let e: f64 = row[d..].iter().zip(theta).map(|(x, t)| x * t).sum();
                total += w * (if obs == 1 { e } else { 0.0 } - log1p_exp(e));
            } else {
                for (a, e) in eta.iter_mut().enumerate() {
                    *e = row[a * d..(a + 1) * d].iter().zip(theta).map(|(x, t)| x * t).sum();
                }
                total += w * (eta[obs as usize] - crate::numeric::log_sum_exp(&eta));
            }
        }
        total
    }

    /// Value, gradient and Hessian in one pass.
    pub fn derivatives(&self, theta: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let d = self.dim;
        let mut value = 0.0;
        let mut grad = DVector::zeros(d);
        let mut hess = DMatrix::zeros(d, d);
        let mut eta = vec![0.0; self.alternatives];
        let mut p = vec![0.0; self.alternatives];
        let mut mean = vec![0.0; d];
        for (r, (&w, &obs)) in self.weights.iter().zip(&self.observed).enumerate() {
            let row = self.row(r);
            if self.logistic {
                let x = &row[d..];
                let e: f64 = x.iter().zip(theta).map(|(x, t)| x * t).sum();
                let pr = logistic(e);
                let y = obs as f64;
                value += w * (y * e - log1p_exp(e));
                let c = w * pr * (1.0 - pr);
                for a in 0..d {
                    grad[a] += w * (y - pr) * x[a];
                    for b in 0..=a {
                        hess[(a, b)] -= c * x[a] * x[b];
                    }
                }
                continue;
            }
            for (a, e) in eta.iter_mut().enumerate() {
                *e = row[a * d..(a + 1) * d].iter().zip(theta).map(|(x, t)| x * t).sum();
            }
            let lse = crate::numeric::log_sum_exp(&eta);
            value += w * (eta[obs as usize] - lse);
            mean.iter_mut().for_each(|m| *m = 0.0);
            for (a, pa) in p.iter_mut().enumerate() {
                *pa = (eta[a] - lse).exp();
                for k in 0..d {
                    mean[k] += *pa * row[a * d + k];
                }
            }
            let x_obs = &row[obs as usize * d..(obs as usize + 1) * d];
            for k in 0..d {
                grad[k] += w * (x_obs[k] - mean[k]);
            }
            for (a, pa) in p.iter().enumerate() {
                let x = &row[a * d..(a + 1) * d];
                for k in 0..d {
                    for l in 0..=k {
                        hess[(k, l)] -= w * pa * (x[k] - mean[k]) * (x[l] - mean[l]);
                    }
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                hess[(b, a)] = hess[(a, b)];
            }
        }
        (value, grad, hess)
    }

    /// Value and gradient without the Hessian; the inner loop of every
    /// MCMC run over an adjusted pseudolikelihood.
    pub fn value_and_gradient(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.dim;
        grad.iter_mut().for_each(|g| *g = 0.0);
        if !self.logistic {
            let (v, g, _) = self.derivatives(theta);
            grad.copy_from_slice(g.as_slice());
            return v;
        }
        let mut value = 0.0;
        for (r, (&w, &obs)) in self.weights.iter().zip(&self.observed).enumerate() {
            let x = &self.row(r)[d..];
            let e: f64 = x.iter().zip(theta).map(|(x, t)| x * t).sum();
            let y = obs as f64;
            value += w * (y * e - log1p_exp(e));
            let c = w * (y - logistic(e));
            for (g, xa) in grad.iter_mut().zip(x) {
                *g += c * xa;
            }
        }
        value
    }

    pub fn gradient(&self, theta: &[f64]) -> DVector<f64> {
        self.derivatives(theta).1
    }

    pub fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        self.derivatives(theta).2
    }

    /// A coordinate direction along which the log pseudolikelihood increases
    /// without bound, if the data exhibit one (complete or quasi-complete separation).
    pub fn separated_term(&self) -> Option<usize> {
        let d = self.dim;
        for k in 0..d {
            for sign in [1.0, -1.0] {
                let mut varies = false;
                let mut separated = true;
                for (r, &obs) in self.observed.iter().enumerate() {
                    let row = self.row(r);
                    let vals = (0..self.alternatives).map(|a| sign * row[a * d + k]);
                    let max = vals.clone().fold(f64::NEG_INFINITY, f64::max);
                    let min = vals.fold(f64::INFINITY, f64::min);
                    varies |= max > min;
                    if sign * row[obs as usize * d + k] < max {
                        separated = false;
                        break;
                    }
                }
                if separated && varies {
                    return Some(k);
                }
            }
        }
        None
    }
}

/// Outcome of a Newton–Raphson maximisation.
#[derive(Debug, Clone)]
pub struct Mple {
    pub theta: Theta,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

pub const DEFAULT_MPLE_TOL: f64 = 1e-8;
pub const DEFAULT_MPLE_MAX_ITER: usize = 50;

/// Maximum pseudolikelihood estimate by damped Newton–Raphson.
pub fn mple(surface: &PlSurface, init: &Theta, tol: f64, max_iter: usize) -> Result<Mple> {
    check_dim(surface.dim(), init.dim())?;
    if let Some(term) = surface.separated_term() {
        return Err(Error::Separation { term });
    }
    let mut theta = init.to_dvector();
    let (mut value, mut grad, mut hess) = surface.derivatives(theta.as_slice());
    for it in 0..=max_iter {
        let gnorm = grad.amax();
        if gnorm < tol {
            return Ok(Mple {
                theta: Theta::from_dvector(&theta)?,
                iterations: it,
                grad_norm: gnorm,
                converged: true,
            });
        }
        if it == max_iter {
            break;
        }
        let step = match (-&hess).cholesky() {
            Some(ch) => ch.solve(&grad),
            None => grad.clone(),
        };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..=30 {
            let cand = &theta + &step * scale;
            let cv = surface.log_pl(cand.as_slice());
            if cv.is_finite() && cv >= value {
                theta = cand;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
        (value, grad, hess) = surface.derivatives(theta.as_slice());
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        grad_norm: grad.amax(),
        last: theta.iter().copied().collect(),
    })
}
