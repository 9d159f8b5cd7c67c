use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::calibration::{build_adjusted, AdjustmentInput, AdjustmentSettings, AdjustedLikelihood, LogLikelihood};
use crate::error::{Error, Result};
use crate::model::StatVector;
use crate::potts::{
    exact_sample, log_partition_table, potts_stat, quadrature_evidence, true_log_evidence, PottsModel,
    PottsSampler, QuadratureGrid,
};
use crate::prior::GaussianPrior;
use crate::pseudolikelihood::PlSurface;
use crate::seeds::{stream, Phase};

use super::data::Dataset;
use super::report::REPORT_SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PottsStudySettings {
    pub height: usize,
    pub width: usize,
    pub states: u8,
    /// Interaction used to simulate the datasets.
    pub theta: f64,
    pub datasets: usize,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
    pub prior_mean: f64,
    pub prior_variance: f64,
    pub adjust: AdjustmentSettings,
    pub seed: u64,
}

impl Default for PottsStudySettings {
    fn default() -> Self {
        Self {
            height: 15,
            width: 15,
            states: 2,
            theta: 0.4,
            datasets: 10,
            grid_min: 0.0,
            grid_max: 0.8,
            grid_points: 5000,
            prior_mean: 0.0,
            prior_variance: 25.0,
            adjust: AdjustmentSettings::default(),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PottsStudyRow {
    pub dataset: usize,
    pub statistic: f64,
    pub theta_mple: f64,
    pub theta_mle: f64,
    pub w: f64,
    pub log_c: f64,
    pub true_log_evidence: f64,
    pub pl_log_evidence: f64,
    pub adjusted_log_evidence: f64,
    pub adjust_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PottsStudyReport {
    pub schema_version: u32,
    pub settings: PottsStudySettings,
    pub rows: Vec<PottsStudyRow>,
}

impl PottsStudyReport {
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:>3} {:>8} {:>8} {:>8} {:>12} {:>12} {:>12}\n",
            "#", "s(y)", "mple", "mle", "true", "PL", "adjusted"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:>3} {:>8} {:>8.4} {:>8.4} {:>12.4} {:>12.4} {:>12.4}\n",
                r.dataset, r.statistic, r.theta_mple, r.theta_mle, r.true_log_evidence, r.pl_log_evidence,
                r.adjusted_log_evidence
            ));
        }
        out
    }

    /// Plot-ready comma-separated rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,statistic,theta_mple,theta_mle,w,log_c,true,pl,adjusted\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.dataset, r.statistic, r.theta_mple, r.theta_mle, r.w, r.log_c, r.true_log_evidence,
                r.pl_log_evidence, r.adjusted_log_evidence
            ));
        }
        out
    }
}

/// Simulates `datasets` lattices exactly and compares, per dataset, the true
/// evidence (quadrature over exact `z`) with the evidence under the raw and
/// the adjusted pseudolikelihood (same quadrature).
pub fn run_potts_study(settings: &PottsStudySettings) -> Result<PottsStudyReport> {
    if settings.datasets == 0 {
        return Err(Error::Config("datasets must be at least 1".into()));
    }
    let model = PottsModel {
        height: settings.height,
        width: settings.width,
        states: settings.states,
    };
    let grid = QuadratureGrid::uniform(settings.grid_min, settings.grid_max, settings.grid_points)?;
    let prior = GaussianPrior::isotropic(vec![settings.prior_mean], settings.prior_variance)?;
    let log_z = log_partition_table(&model, &grid).map_err(|e| e.in_phase("exact partition table"))?;
    let sampler = PottsSampler::new(settings.height, settings.width, settings.states);
    if !sampler.is_exact() {
        return Err(Error::Invalid("lattice is beyond the exact-recursion budget".into()));
    }
    let mut rows = Vec::with_capacity(settings.datasets);
    for i in 0..settings.datasets {
        let mut rng = stream(settings.seed, Phase::Data, 0, i as u64);
        let data = exact_sample(settings.height, settings.width, settings.states, settings.theta, &mut rng)?;
        let surface = PlSurface::potts(&data)?;
        let dataset = Dataset::Lattice(data.clone());
        let adjust = AdjustmentSettings {
            seed: rng.next_u64(),
            ..settings.adjust
        };
        let input = AdjustmentInput {
            sampler: &sampler,
            surface: &surface,
            observed: StatVector::new(vec![potts_stat(&data)])?,
            model: dataset.model_label(),
            data_hash: dataset.hash(),
        };
        let artifact = build_adjusted(&input, &adjust)?;
        let adjusted = AdjustedLikelihood::new(&artifact, surface.clone())?;
        let prior_term = |t: f64| prior.log_density(&[t]);
        rows.push(PottsStudyRow {
            dataset: i,
            statistic: potts_stat(&data),
            theta_mple: artifact.theta_mple[0],
            theta_mle: artifact.theta_mle[0],
            w: artifact.w[0][0],
            log_c: artifact.log_c,
            true_log_evidence: true_log_evidence(&data, &prior, &grid, &log_z)?,
            pl_log_evidence: quadrature_evidence(&grid, |t| surface.log_pl(&[t]) + prior_term(t))?,
            adjusted_log_evidence: quadrature_evidence(&grid, |t| adjusted.log_likelihood(&[t]) + prior_term(t))?,
            adjust_seconds: artifact.timings.total,
        });
    }
    Ok(PottsStudyReport {
        schema_version: REPORT_SCHEMA_VERSION,
        settings: settings.clone(),
        rows,
    })
}
