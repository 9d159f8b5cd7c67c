use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calibration::{AdjustmentSettings, LadderSpec, McmleSettings};
use crate::error::{Error, Result};
use crate::evidence::{EvidenceSettings, Method};
use crate::mcmc::ChainSettings;
use crate::prior::GaussianPrior;

/// Prior given either as an isotropic variance or a full covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    /// Prior mean; a single value is broadcast to every coordinate.
    pub mean: Vec<f64>,
    pub variance: Option<f64>,
    pub cov: Option<Vec<Vec<f64>>>,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            mean: vec![0.0],
            variance: Some(100.0),
            cov: None,
        }
    }
}

impl PriorConfig {
    pub fn build(&self, dim: usize) -> Result<GaussianPrior> {
        let mean = match self.mean.len() {
            1 => vec![self.mean[0]; dim],
            n if n == dim => self.mean.clone(),
            n => return Err(Error::Config(format!("prior mean has {n} entries, model has {dim} parameters"))),
        };
        match (&self.cov, self.variance) {
            (Some(cov), None) => {
                if cov.len() != dim || cov.iter().any(|r| r.len() != dim) {
                    return Err(Error::Config(format!("prior covariance must be {dim} x {dim}")));
                }
                let m = nalgebra::DMatrix::from_fn(dim, dim, |i, j| cov[i][j]);
                GaussianPrior::new(nalgebra::DVector::from_vec(mean), m)
            }
            (None, Some(v)) => GaussianPrior::isotropic(mean, v),
            _ => Err(Error::Config("prior needs exactly one of `variance` or `cov`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdjustConfig {
    pub mcmle_draws: usize,
    pub mcmle_iterations: usize,
    pub moment_draws: usize,
    pub path_rungs: usize,
    pub path_draws: usize,
    /// Network sampler burn-in and thinning (TNT steps).
    pub burn_in: usize,
    pub thin: usize,
    pub p_edge: f64,
}

impl Default for AdjustConfig {
    fn default() -> Self {
        Self {
            mcmle_draws: 1500,
            mcmle_iterations: 20,
            moment_draws: 1500,
            path_rungs: 100,
            path_draws: 1500,
            burn_in: 5000,
            thin: 50,
            p_edge: 0.5,
        }
    }
}

impl AdjustConfig {
    pub fn settings(&self, seed: u64) -> AdjustmentSettings {
        AdjustmentSettings {
            mcmle: McmleSettings {
                draws: self.mcmle_draws,
                iterations: self.mcmle_iterations,
                ..McmleSettings::default()
            },
            moment_draws: self.moment_draws,
            path_ladder: LadderSpec {
                rungs: self.path_rungs,
                power: 1.0,
            },
            path_draws: self.path_draws,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvidenceConfig {
    /// Method names, or `["all"]`.
    pub methods: Vec<String>,
    pub replicates: usize,
    pub lambda: Option<f64>,
    pub cj_draws: usize,
    pub cj_burn_in: usize,
    pub cj_proposal_draws: usize,
    pub theta_star: Option<Vec<f64>>,
    pub rungs: usize,
    pub power: f64,
    pub rung_draws: usize,
    pub rung_burn_in: usize,
    pub cti_degree: u8,
}

impl Default for EvidenceConfig {
    fn default() -> Self {
        let d = EvidenceSettings::default();
        Self {
            methods: vec!["all".into()],
            replicates: d.replicates,
            lambda: d.lambda,
            cj_draws: d.chib_chain.draws,
            cj_burn_in: d.chib_chain.burn_in,
            cj_proposal_draws: d.chib_proposal_draws,
            theta_star: None,
            rungs: d.ladder.rungs,
            power: d.ladder.power,
            rung_draws: d.rung_chain.draws,
            rung_burn_in: d.rung_chain.burn_in,
            cti_degree: d.cti_degree,
        }
    }
}

impl EvidenceConfig {
    pub fn methods(&self) -> Result<Vec<Method>> {
        let mut out = Vec::new();
        for name in &self.methods {
            if name.eq_ignore_ascii_case("all") {
                out.extend(Method::ALL);
            } else {
                out.push(name.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("no evidence method selected".into()));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn settings(&self, seed: u64) -> EvidenceSettings {
        EvidenceSettings {
            lambda: self.lambda,
            chib_chain: ChainSettings {
                draws: self.cj_draws,
                burn_in: self.cj_burn_in,
            },
            chib_proposal_draws: self.cj_proposal_draws,
            theta_star: self.theta_star.clone(),
            ladder: LadderSpec {
                rungs: self.rungs,
                power: self.power,
            },
            rung_chain: ChainSettings {
                draws: self.rung_draws,
                burn_in: self.rung_burn_in,
            },
            cti_degree: self.cti_degree,
            replicates: self.replicates,
            seed,
        }
    }
}

/// Run configuration read from a TOML file; every command-line flag
/// overrides the corresponding entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub model: Option<String>,
    pub output_dir: PathBuf,
    pub prior: PriorConfig,
    pub adjust: AdjustConfig,
    pub evidence: EvidenceConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            model: None,
            output_dir: PathBuf::from("."),
            prior: PriorConfig::default(),
            adjust: AdjustConfig::default(),
            evidence: EvidenceConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
