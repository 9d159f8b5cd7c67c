//! Potts and Ising lattices with first-order neighbourhoods.

mod exact;
mod lattice;
mod quadrature;

pub use exact::{
    exact_log_partition, exact_log_partition_with_budget, exact_sample, ExactSampler, PottsSampler,
    DEFAULT_MESSAGE_BUDGET,
};
pub use lattice::{full_conditional, gibbs_sweep, potts_stat, Lattice, PottsModel};
pub use quadrature::{log_trapezoid, quadrature_evidence, QuadratureGrid};

use crate::error::Result;
use crate::prior::GaussianPrior;

/// Exact `log z(θ)` at every grid point; depends only on the lattice shape,
/// so one table serves every dataset of that shape.
pub fn log_partition_table(model: &PottsModel, grid: &QuadratureGrid) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    grid.points()
        .par_iter()
        .map(|&t| exact_log_partition(model.height, model.width, model.states, t))
        .collect()
}

/// Ground-truth `log π(y)` for a Potts dataset: trapezoidal integration of
/// `q(y|θ)p(θ)/z(θ)` with exact `z`.
pub fn true_log_evidence(
    data: &Lattice,
    prior: &GaussianPrior,
    grid: &QuadratureGrid,
    log_z: &[f64],
) -> Result<f64> {
    let s = potts_stat(data);
    let values: Vec<f64> = grid
        .points()
        .iter()
        .zip(log_z)
        .map(|(&t, lz)| t * s - lz + prior.log_density(&[t]))
        .collect();
    log_trapezoid(grid, &values)
}
