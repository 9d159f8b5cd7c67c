use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{linspace, LogAccumulator};

/// Strictly increasing integration nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    points: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Invalid("quadrature grid needs at least 2 points".into()));
        }
        if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid("quadrature grid must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// `m` equally spaced points on `[a, b]`.
    pub fn uniform(a: f64, b: f64, m: usize) -> Result<Self> {
        if m < 2 || !(b > a) {
            return Err(Error::Invalid("uniform grid needs m >= 2 and b > a".into()));
        }
        Self::new(linspace(a, b, m))
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// `log ∫ exp(h(θ)) dθ` by the trapezoidal rule, given `h` at the grid
/// points, accumulated in log space.
pub fn log_trapezoid(grid: &QuadratureGrid, log_values: &[f64]) -> Result<f64> {
    let pts = grid.points();
    if log_values.len() != pts.len() {
        return Err(Error::DimensionMismatch {
            expected: pts.len(),
            got: log_values.len(),
        });
    }
    let mut acc = LogAccumulator::default();
    for i in 1..pts.len() {
        let half_width = (0.5 * (pts[i] - pts[i - 1])).ln();
        acc.add(half_width + log_values[i]);
        acc.add(half_width + log_values[i - 1]);
    }
    Ok(acc.value())
}

/// Evidence `log ∫ f(y|θ) p(θ) dθ` over the grid for a one-parameter model,
/// with `log_target(θ) = log f(y|θ) + log p(θ)`.
pub fn quadrature_evidence(grid: &QuadratureGrid, log_target: impl Fn(f64) -> f64) -> Result<f64> {
    let values: Vec<f64> = grid.points().iter().map(|&t| log_target(t)).collect();
    log_trapezoid(grid, &values)
}
