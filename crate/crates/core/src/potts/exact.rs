//! Exact partition function and exact sampling by a site-by-site forward
//! recursion.
//!
//! Sites are visited column by column, top to bottom, along the shorter
//! lattice dimension (the *lag*). After visiting a site the recursion keeps a
//! message over the joint states of the last `lag` visited sites; these are
//! exactly the sites a later site can still interact with. Adding a site
//! multiplies in its interactions with the site above (the newest window
//! digit) and the site to the left (the oldest digit, which is then summed
//! out). Storing every message allows drawing exact samples backwards.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::model::{LikelihoodSampler, StatVector, Theta};
use crate::seeds::Rng;

use super::lattice::{potts_stat, Lattice};

/// Default bound on `S^lag`, the number of messages kept per site.
pub const DEFAULT_MESSAGE_BUDGET: usize = 1 << 16;

/// Messages of the forward recursion, in a column-major "view" where the
/// column length is the lag.
#[derive(Debug, Clone)]
struct Forward {
    lag: usize,
    columns: usize,
    states: usize,
    transposed: bool,
    log_z: f64,
    /// One message vector per visited site from the end of the first column on.
    messages: Vec<Vec<f64>>,
}

fn check_budget(height: usize, width: usize, states: usize, budget: usize) -> Result<usize> {
    let lag = height.min(width);
    let required = (states as f64).powi(lag as i32);
    if required > budget as f64 {
        return Err(Error::RecursionBudget {
            lag,
            states,
            required,
            budget,
        });
    }
    Ok(lag)
}

fn forward(
    height: usize,
    width: usize,
    states: u8,
    theta: f64,
    budget: usize,
    keep: bool,
) -> Result<Forward> {
    if height == 0 || width == 0 || states < 2 {
        return Err(Error::Invalid("lattice needs positive dimensions and S >= 2".into()));
    }
    if !theta.is_finite() {
        return Err(Error::NonFinite("theta"));
    }
    let s = states as usize;
    let lag = check_budget(height, width, s, budget)?;
    let transposed = height > width;
    let columns = height.max(width);
    let size = s.pow(lag as u32);
    let stride = size / s;

    // First column: weight of each joint state from its vertical pairs.
    let mut msg = vec![0.0; size];
    let mut digits = vec![0usize; lag];
    let mut log_w = vec![0.0; size];
    for (idx, lw) in log_w.iter_mut().enumerate() {
        let mut rem = idx;
        for d in digits.iter_mut().rev() {
            *d = rem % s;
            rem /= s;
        }
        let equal = digits.windows(2).filter(|p| p[0] == p[1]).count();
        *lw = theta * equal as f64;
    }
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (m, lw) in msg.iter_mut().zip(&log_w) {
        *m = (lw - max).exp();
        sum += *m;
    }
    let mut log_z = max;
    let mut messages = Vec::new();

    let boost = theta.exp();
    let k = boost - 1.0;
    let mut next = vec![0.0; size];
    for _ in 1..columns {
        for r in 0..lag {
            // fold the previous normalisation into this step
            let inv = 1.0 / sum;
            log_z += sum.ln();
            if keep {
                messages.push(msg.clone());
            }
            let has_up = r > 0;
            sum = 0.0;
            if s == 2 {
                for rest in 0..stride {
                    let a = msg[rest] * inv;
                    let b = msg[stride + rest] * inv;
                    let base = a + b;
                    let mut v0 = base + k * a;
                    let mut v1 = base + k * b;
                    if has_up {
                        if rest & 1 == 0 {
                            v0 *= boost;
                        } else {
                            v1 *= boost;
                        }
                    }
                    next[2 * rest] = v0;
                    next[2 * rest + 1] = v1;
                    sum += v0 + v1;
                }
            } else {
                for rest in 0..stride {
                    let mut base = 0.0;
                    for o in 0..s {
                        base += msg[o * stride + rest];
                    }
                    let up = rest % s;
                    for x in 0..s {
                        let mut v = (base + k * msg[x * stride + rest]) * inv;
                        if has_up && x == up {
                            v *= boost;
                        }
                        next[rest * s + x] = v;
                        sum += v;
                    }
                }
            }
            std::mem::swap(&mut msg, &mut next);
        }
    }
    log_z += sum.ln();
    if keep {
        messages.push(msg);
    }
    Ok(Forward {
        lag,
        columns,
        states: s,
        transposed,
        log_z,
        messages,
    })
}

/// Exact `log z(θ)` of an `height × width` Potts lattice with `states` states.
pub fn exact_log_partition(height: usize, width: usize, states: u8, theta: f64) -> Result<f64> {
    exact_log_partition_with_budget(height, width, states, theta, DEFAULT_MESSAGE_BUDGET)
}

pub fn exact_log_partition_with_budget(
    height: usize,
    width: usize,
    states: u8,
    theta: f64,
    budget: usize,
) -> Result<f64> {
    Ok(forward(height, width, states, theta, budget, false)?.log_z)
}

/// Exact sampler at a fixed θ; the forward pass is done once and every draw
/// is a cheap backward pass.
#[derive(Debug, Clone)]
pub struct ExactSampler {
    height: usize,
    width: usize,
    states: u8,
    forward: Forward,
    boost: f64,
}

impl ExactSampler {
    pub fn new(height: usize, width: usize, states: u8, theta: f64) -> Result<Self> {
        Self::with_budget(height, width, states, theta, DEFAULT_MESSAGE_BUDGET)
    }

    pub fn with_budget(height: usize, width: usize, states: u8, theta: f64, budget: usize) -> Result<Self> {
        Ok(Self {
            height,
            width,
            states,
            forward: forward(height, width, states, theta, budget, true)?,
            boost: theta.exp(),
        })
    }

    pub fn log_partition(&self) -> f64 {
        self.forward.log_z
    }

    pub fn sample(&self, rng: &mut Rng) -> Lattice {
        let f = &self.forward;
        let s = f.states;
        let size = s.pow(f.lag as u32);
        let stride = size / s;
        let n = f.lag * f.columns;
        let mut view = vec![0u8; n];

        let last = f.messages.last().unwrap();
        let mut window = pick(last.iter().copied(), rng);
        let mut weights = vec![0.0; s];
        for (step, p) in (f.lag..n).rev().enumerate() {
            let x = window % s;
            view[p] = x as u8;
            let rest = window / s;
            let prev = &f.messages[f.messages.len() - 2 - step];
            for (o, w) in weights.iter_mut().enumerate() {
                *w = prev[o * stride + rest] * if o == x { self.boost } else { 1.0 };
            }
            let o = pick(weights.iter().copied(), rng);
            window = o * stride + rest;
        }
        for p in (0..f.lag).rev() {
            view[p] = (window % s) as u8;
            window /= s;
        }

        let mut cells = vec![0u8; n];
        for c in 0..f.columns {
            for r in 0..f.lag {
                let v = view[c * f.lag + r] + 1;
                let idx = if f.transposed {
                    c * self.width + r
                } else {
                    r * self.width + c
                };
                cells[idx] = v;
            }
        }
        Lattice::new(self.height, self.width, self.states, cells).expect("valid by construction")
    }
}

fn pick(weights: impl Iterator<Item = f64> + Clone, rng: &mut Rng) -> usize {
    let total: f64 = weights.clone().sum();
    let mut u = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last = i;
            if u < w {
                return i;
            }
        }
        u -= w;
    }
    last
}

/// Draws one lattice from `f(y|θ)`.
pub fn exact_sample(height: usize, width: usize, states: u8, theta: f64, rng: &mut Rng) -> Result<Lattice> {
    Ok(ExactSampler::new(height, width, states, theta)?.sample(rng))
}

/// [`LikelihoodSampler`] for Potts lattices: exact draws when the lag fits the
/// message budget, otherwise a Gibbs chain.
#[derive(Debug, Clone)]
pub struct PottsSampler {
    pub height: usize,
    pub width: usize,
    pub states: u8,
    pub budget: usize,
    pub gibbs_burn_in: usize,
    pub gibbs_thin: usize,
}

impl PottsSampler {
    pub fn new(height: usize, width: usize, states: u8) -> Self {
        Self {
            height,
            width,
            states,
            budget: DEFAULT_MESSAGE_BUDGET,
            gibbs_burn_in: 500,
            gibbs_thin: 5,
        }
    }

    pub fn is_exact(&self) -> bool {
        check_budget(self.height, self.width, self.states as usize, self.budget).is_ok()
    }
}

impl LikelihoodSampler for PottsSampler {
    fn dim(&self) -> usize {
        1
    }

    fn log_z_zero(&self) -> f64 {
        (self.height * self.width) as f64 * (self.states as f64).ln()
    }

    fn sample_stats(&self, theta: &Theta, count: usize, rng: &mut Rng) -> Result<Vec<StatVector>> {
        crate::model::check_dim(1, theta.dim())?;
        let t = theta[0];
        if self.is_exact() {
            let sampler = ExactSampler::with_budget(self.height, self.width, self.states, t, self.budget)?;
            return Ok((0..count)
                .map(|_| StatVector::from_raw(vec![potts_stat(&sampler.sample(rng))]))
                .collect());
        }
        let mut l = Lattice::uniform(self.height, self.width, self.states, 1)?;
        for site in 0..l.len() {
            let v = rng.gen_range(1..=self.states);
            l.set(site / self.width, site % self.width, v);
        }
        for _ in 0..self.gibbs_burn_in {
            super::lattice::gibbs_sweep(&mut l, t, rng);
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            for _ in 0..self.gibbs_thin.max(1) {
                super::lattice::gibbs_sweep(&mut l, t, rng);
            }
            out.push(StatVector::from_raw(vec![potts_stat(&l)]));
        }
        Ok(out)
    }
}
