use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::calibration::TemperatureLadder;
use crate::error::{Error, Result};
use crate::mcmc::RungSamples;
use crate::numeric::{log_mean_exp, mean};

fn check_rungs(n: usize, ladder: &TemperatureLadder) -> Result<()> {
    if n != ladder.points().len() {
        return Err(Error::Invalid(format!(
            "ladder has {} temperatures but {n} rung summaries were given",
            ladder.points().len()
        )));
    }
    Ok(())
}

/// Trapezium rule over `E_i = E_{t_i}[log L]` with the variance correction
/// `−(Δt²/12)(V_{i+1} − V_i)`, where `V_i = Var_{t_i}[log L]` is the
/// derivative of `E_t` in `t`.
pub fn ti_improved_trapezoid(means: &[f64], variances: &[f64], ladder: &TemperatureLadder) -> Result<f64> {
    check_rungs(means.len(), ladder)?;
    check_rungs(variances.len(), ladder)?;
    let t = ladder.points();
    let mut total = 0.0;
    for i in 0..ladder.intervals() {
        let dt = t[i + 1] - t[i];
        total += dt / 2.0 * (means[i + 1] + means[i]) - dt * dt / 12.0 * (variances[i + 1] - variances[i]);
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::NonFinite("thermodynamic integral"))
    }
}

/// Power-posterior thermodynamic integration from raw rung means.
pub fn thermodynamic_integration(rungs: &[RungSamples], ladder: &TemperatureLadder) -> Result<f64> {
    let means: Vec<f64> = rungs.iter().map(RungSamples::mean_log_lik).collect();
    let vars: Vec<f64> = rungs.iter().map(RungSamples::var_log_lik).collect();
    ti_improved_trapezoid(&means, &vars, ladder)
}

/// Zero-variance control variates at one draw. With `u = ∇ log π_t(θ)`,
/// degree 1 gives `u_k`; degree 2 adds `1 + θ_k u_k` and `θ_k u_l + θ_l u_k`
/// for `k < l`. Each has mean zero under `π_t`.
pub fn zv_controls(theta: &[f64], score: &[f64], degree: u8, out: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(score);
    if degree >= 2 {
        let d = theta.len();
        for k in 0..d {
            out.push(1.0 + theta[k] * score[k]);
        }
        for k in 0..d {
            for l in k + 1..d {
                out.push(theta[k] * score[l] + theta[l] * score[k]);
            }
        }
    }
}

/// Control-variate estimate of `E_t[log L]` for one rung; `None` when the
/// least-squares system is ill-conditioned.
pub fn controlled_mean(rung: &RungSamples, degree: u8) -> Option<f64> {
    let n = rung.len();
    let mut h = Vec::new();
    zv_controls(rung.draw(0), rung.score_at(0), degree, &mut h);
    let m = h.len();
    if n <= m + 1 {
        return None;
    }
    let mut rows = Vec::with_capacity(n * m);
    for i in 0..n {
        zv_controls(rung.draw(i), rung.score_at(i), degree, &mut h);
        rows.extend_from_slice(&h);
    }
    let hm: Vec<f64> = (0..m).map(|k| (0..n).map(|i| rows[i * m + k]).sum::<f64>() / n as f64).collect();
    let fm = mean(&rung.log_lik);
    let mut shh = DMatrix::<f64>::zeros(m, m);
    let mut shf = DVector::<f64>::zeros(m);
    for i in 0..n {
        let row = &rows[i * m..(i + 1) * m];
        let fc = rung.log_lik[i] - fm;
        for a in 0..m {
            let ca = row[a] - hm[a];
            shf[a] += ca * fc;
            for b in 0..=a {
                shh[(a, b)] += ca * (row[b] - hm[b]);
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            shh[(b, a)] = shh[(a, b)];
        }
    }
    let scale = shh.diagonal().amax();
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let eig = shh.clone().symmetric_eigen();
    if eig.eigenvalues.min() < 1e-12 * scale {
        return None;
    }
    let beta = shh.cholesky()?.solve(&shf);
    let adjusted = fm - beta.iter().zip(&hm).map(|(b, h)| b * h).sum::<f64>();
    adjusted.is_finite().then_some(adjusted)
}

/// Controlled thermodynamic integration: rung means replaced by their
/// zero-variance control-variate versions, then the improved trapezium rule.
pub fn cti(rungs: &[RungSamples], ladder: &TemperatureLadder, degree: u8) -> Result<f64> {
    if !(1..=2).contains(&degree) {
        return Err(Error::Invalid(format!("control-variate degree must be 1 or 2, got {degree}")));
    }
    check_rungs(rungs.len(), ladder)?;
    let means: Vec<f64> = rungs
        .iter()
        .map(|r| {
            controlled_mean(r, degree).unwrap_or_else(|| {
                warn!("rung t={}: control-variate system ill-conditioned, using the raw mean", r.t);
                r.mean_log_lik()
            })
        })
        .collect();
    let vars: Vec<f64> = rungs.iter().map(RungSamples::var_log_lik).collect();
    ti_improved_trapezoid(&means, &vars, ladder)
}

/// Stepping stones: `Σ_k log mean_j exp{(t_{k+1} − t_k) log L(θ_j^{(k)})}`
/// with `θ^{(k)} ~ π_{t_k}`.
pub fn stepping_stones(rungs: &[RungSamples], ladder: &TemperatureLadder) -> Result<f64> {
    check_rungs(rungs.len(), ladder)?;
    let t = ladder.points();
    let mut total = 0.0;
    let mut buf = Vec::new();
    for k in 0..ladder.intervals() {
        let dt = t[k + 1] - t[k];
        buf.clear();
        buf.extend(rungs[k].log_lik.iter().map(|l| dt * l));
        total += log_mean_exp(&buf);
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::NonFinite("stepping-stone estimate"))
    }
}
