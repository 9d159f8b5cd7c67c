use std::path::Path;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{check_dim, LikelihoodSampler, StatVector, Theta};
use crate::numeric::dot;
use crate::pseudolikelihood::{mple, PlSurface, DEFAULT_MPLE_MAX_ITER, DEFAULT_MPLE_TOL};
use crate::seeds::{stream, Phase};

use super::curvature::curvature_matrix;
use super::ladder::{LadderSpec, TemperatureLadder};
use super::mcmle::{mcmle, McmleSettings};
use super::moments::estimate_moments;
use super::path::estimate_log_partition_path;

pub const ARTIFACT_SCHEMA_VERSION: u32 = 1;

/// Hex SHA-256 of the bytes identifying the observed data.
pub fn data_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentSettings {
    pub mcmle: McmleSettings,
    /// Draws behind `Ê[s]` and `V̂[s]` at the MLE.
    pub moment_draws: usize,
    pub path_ladder: LadderSpec,
    /// Draws per path-sampling rung.
    pub path_draws: usize,
    pub seed: u64,
}

impl Default for AdjustmentSettings {
    fn default() -> Self {
        Self {
            mcmle: McmleSettings::default(),
            moment_draws: 1500,
            path_ladder: LadderSpec { rungs: 100, power: 1.0 },
            path_draws: 1500,
            seed: 1,
        }
    }
}

/// Wall-clock seconds per adjustment phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub mode: f64,
    pub curvature: f64,
    pub magnitude: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmleDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub final_ess: f64,
    pub mple_iterations: usize,
}

/// Everything that defines a fully adjusted pseudolikelihood
/// `log f̃(y|θ) = log C + log PL(θ̂_MPLE + W(θ − θ̂_MLE))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentArtifact {
    pub schema_version: u32,
    /// Human-readable model description, e.g. a term list or lattice shape.
    pub model: String,
    pub data_hash: String,
    pub observed: StatVector,
    pub theta_mple: Theta,
    pub theta_mle: Theta,
    /// Row-major `d × d` upper-triangular matrix.
    pub w: Vec<Vec<f64>>,
    pub log_c: f64,
    pub log_z_at_mle: f64,
    pub stat_mean: Vec<f64>,
    pub stat_cov: Vec<Vec<f64>>,
    pub settings: AdjustmentSettings,
    pub diagnostics: McmleDiagnostics,
    pub timings: PhaseTimings,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn from_rows(r: &[Vec<f64>], d: usize) -> Result<DMatrix<f64>> {
    if r.len() != d || r.iter().any(|row| row.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: r.len() });
    }
    Ok(DMatrix::from_fn(d, d, |i, j| r[i][j]))
}

impl AdjustmentArtifact {
    pub fn dim(&self) -> usize {
        self.theta_mle.dim()
    }

    pub fn w_matrix(&self) -> DMatrix<f64> {
        from_rows(&self.w, self.dim()).expect("validated on construction and load")
    }

    pub fn stat_cov_matrix(&self) -> DMatrix<f64> {
        from_rows(&self.stat_cov, self.dim()).expect("validated on construction and load")
    }

    /// `g(θ) = θ̂_MPLE + W(θ − θ̂_MLE)`.
    pub fn map(&self, theta: &[f64]) -> DVector<f64> {
        let diff = DVector::from_column_slice(theta) - self.theta_mle.to_dvector();
        self.theta_mple.to_dvector() + self.w_matrix() * diff
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version != ARTIFACT_SCHEMA_VERSION {
            return Err(Error::Schema {
                found: self.schema_version,
                supported: ARTIFACT_SCHEMA_VERSION,
            });
        }
        let d = self.dim();
        check_dim(d, self.theta_mple.dim())?;
        check_dim(d, self.observed.dim())?;
        check_dim(d, self.stat_mean.len())?;
        let w = from_rows(&self.w, d)?;
        from_rows(&self.stat_cov, d)?;
        for i in 0..d {
            if !(w[(i, i)] > 0.0) || (0..i).any(|j| w[(i, j)] != 0.0) {
                return Err(Error::Invalid("W must be upper triangular with positive diagonal".into()));
            }
        }
        if !self.log_c.is_finite() || !self.log_z_at_mle.is_finite() {
            return Err(Error::NonFinite("artifact constants"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let found = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if found != ARTIFACT_SCHEMA_VERSION {
            return Err(Error::Schema {
                found,
                supported: ARTIFACT_SCHEMA_VERSION,
            });
        }
        let artifact: Self = serde_json::from_value(value)?;
        artifact.validate()?;
        Ok(artifact)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// What an adjustment needs to know about one observed dataset.
pub struct AdjustmentInput<'a> {
    pub sampler: &'a dyn LikelihoodSampler,
    pub surface: &'a PlSurface,
    pub observed: StatVector,
    pub model: String,
    pub data_hash: String,
}

/// Mode, curvature and magnitude adjustment of the pseudolikelihood.
pub fn build_adjusted(input: &AdjustmentInput<'_>, settings: &AdjustmentSettings) -> Result<AdjustmentArtifact> {
    let d = input.sampler.dim();
    check_dim(d, input.surface.dim())?;
    check_dim(d, input.observed.dim())?;
    let ladder = TemperatureLadder::from_spec(settings.path_ladder).map_err(|e| e.in_phase("settings"))?;
    let start = Instant::now();

    let pl_mode = mple(input.surface, &Theta::zeros(d), DEFAULT_MPLE_TOL, DEFAULT_MPLE_MAX_ITER)
        .map_err(|e| e.in_phase("mple"))?;
    let ml = mcmle(input.sampler, &input.observed, &pl_mode.theta, &settings.mcmle, settings.seed)
        .map_err(|e| e.in_phase("mcmle"))?;
    let mode_done = Instant::now();

    let mut rng = stream(settings.seed, Phase::Moments, 0, 0);
    let (stat_mean, stat_cov) = estimate_moments(input.sampler, &ml.theta, settings.moment_draws, &mut rng)
        .map_err(|e| e.in_phase("moments"))?;
    let hess_pl = input.surface.hessian(&pl_mode.theta);
    let w = curvature_matrix(&-&stat_cov, &hess_pl).map_err(|e| e.in_phase("curvature"))?;
    let curvature_done = Instant::now();

    let log_z = estimate_log_partition_path(input.sampler, &ml.theta, &ladder, settings.path_draws, settings.seed)
        .map_err(|e| e.in_phase("path sampling"))?;
    let log_c = dot(&ml.theta, &input.observed) - log_z - input.surface.log_pl(&pl_mode.theta);
    let end = Instant::now();

    let artifact = AdjustmentArtifact {
        schema_version: ARTIFACT_SCHEMA_VERSION,
        model: input.model.clone(),
        data_hash: input.data_hash.clone(),
        observed: input.observed.clone(),
        theta_mple: pl_mode.theta,
        theta_mle: ml.theta,
        w: rows(&w),
        log_c,
        log_z_at_mle: log_z,
        stat_mean: stat_mean.iter().copied().collect(),
        stat_cov: rows(&stat_cov),
        settings: *settings,
        diagnostics: McmleDiagnostics {
            iterations: ml.iterations,
            converged: ml.converged,
            final_ess: ml.final_ess,
            mple_iterations: pl_mode.iterations,
        },
        timings: PhaseTimings {
            mode: (mode_done - start).as_secs_f64(),
            curvature: (curvature_done - mode_done).as_secs_f64(),
            magnitude: (end - curvature_done).as_secs_f64(),
            total: (end - start).as_secs_f64(),
        },
    };
    artifact.validate()?;
    Ok(artifact)
}
