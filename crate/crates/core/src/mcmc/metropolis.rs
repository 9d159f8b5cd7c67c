use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSettings {
    /// Retained draws `T`.
    pub draws: usize,
    pub burn_in: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    dim: usize,
    /// `T × d`, row-major.
    draws: Vec<f64>,
    log_density: Vec<f64>,
    acceptance_rate: f64,
}

impl Chain {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.log_density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_density.is_empty()
    }

    pub fn draw(&self, i: usize) -> &[f64] {
        &self.draws[i * self.dim..(i + 1) * self.dim]
    }

    pub fn draws(&self) -> impl Iterator<Item = &[f64]> {
        self.draws.chunks_exact(self.dim)
    }

    pub fn log_density(&self) -> &[f64] {
        &self.log_density
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.acceptance_rate
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for d in self.draws() {
            for (a, b) in m.iter_mut().zip(d) {
                *a += b;
            }
        }
        m.iter_mut().for_each(|a| *a /= self.len() as f64);
        m
    }

    /// Comma-separated draws with a commented metadata header.
    pub fn write_csv(&self, path: &Path, seed: u64) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# acceptance_rate={}", self.acceptance_rate)?;
        writeln!(out, "# seed={seed}")?;
        let header: Vec<String> = (1..=self.dim).map(|k| format!("theta_{k}")).collect();
        writeln!(out, "{},log_density", header.join(","))?;
        for (d, lp) in self.draws().zip(&self.log_density) {
            let row: Vec<String> = d.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{},{lp}", row.join(","))?;
        }
        Ok(())
    }
}

/// Draws `N(0, Σ)` increments through the lower Cholesky factor of `Σ`.
#[derive(Debug, Clone)]
pub struct GaussianStep {
    factor: DMatrix<f64>,
}

impl GaussianStep {
    pub fn new(cov: &DMatrix<f64>) -> Result<Self> {
        let ch = cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("proposal covariance".into()))?;
        Ok(Self { factor: ch.l() })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn propose(&self, from: &[f64], rng: &mut Rng, out: &mut [f64]) {
        let z = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let step = &self.factor * z;
        for ((o, f), s) in out.iter_mut().zip(from).zip(step.iter()) {
            *o = f + s;
        }
    }
}

/// `log α = min(0, log π(θ') − log π(θ))` for a symmetric proposal; `−∞`
/// when the proposal leaves the support.
#[inline]
pub fn log_acceptance(current_lp: f64, proposed_lp: f64) -> f64 {
    if proposed_lp.is_finite() {
        (proposed_lp - current_lp).min(0.0)
    } else {
        f64::NEG_INFINITY
    }
}

/// Symmetric random-walk Metropolis. The target may return `−∞` outside its
/// support but must be finite at `init`.
pub fn rw_metropolis(
    target: &dyn Fn(&[f64]) -> f64,
    init: &[f64],
    proposal_cov: &DMatrix<f64>,
    settings: &ChainSettings,
    rng: &mut Rng,
) -> Result<Chain> {
    let step = GaussianStep::new(proposal_cov)?;
    let d = init.len();
    if step.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: step.dim(),
            got: d,
        });
    }
    let mut current = init.to_vec();
    let mut current_lp = target(&current);
    if !current_lp.is_finite() {
        return Err(Error::Invalid("target density is zero or undefined at the initial value".into()));
    }
    let mut cand = vec![0.0; d];
    let mut draws = Vec::with_capacity(settings.draws * d);
    let mut log_density = Vec::with_capacity(settings.draws);
    let mut accepted = 0usize;
    for it in 0..settings.burn_in + settings.draws {
        step.propose(&current, rng, &mut cand);
        let lp = target(&cand);
        let u: f64 = rng.gen();
        if u.ln() < log_acceptance(current_lp, lp) {
            std::mem::swap(&mut current, &mut cand);
            current_lp = lp;
            if it >= settings.burn_in {
                accepted += 1;
            }
        }
        if it >= settings.burn_in {
            draws.extend_from_slice(&current);
            log_density.push(current_lp);
        }
    }
    Ok(Chain {
        dim: d,
        draws,
        log_density,
        acceptance_rate: accepted as f64 / settings.draws.max(1) as f64,
    })
}
