use crate::error::Result;
use crate::numeric::log1p_exp;
use crate::potts::{quadrature_evidence, QuadratureGrid};

/// `log π(y)` for an edges-only ERGM with `edges` of `dyads` present and a
/// `N(mean, variance)` prior, by quadrature over `mean ± 12 sd`. The
/// likelihood `exp{θm − D log(1 + e^θ)}` is exact.
pub fn edges_only_log_evidence(dyads: usize, edges: usize, prior_mean: f64, prior_variance: f64) -> Result<f64> {
    let sd = prior_variance.sqrt();
    let grid = QuadratureGrid::uniform(prior_mean - 12.0 * sd, prior_mean + 12.0 * sd, 200_001)?;
    let (d, m) = (dyads as f64, edges as f64);
    let log_norm = -0.5 * (2.0 * std::f64::consts::PI * prior_variance).ln();
    quadrature_evidence(&grid, |t| {
        t * m - d * log1p_exp(t) + log_norm - 0.5 * (t - prior_mean).powi(2) / prior_variance
    })
}
