//! Evidence estimators over (adjusted) posteriors and Bayes factors.

mod chib;
mod power;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{LadderSpec, LogLikelihood, TemperatureLadder};
use crate::error::{Error, Result};
use crate::mcmc::{run_power_posterior_chains, ChainSettings};
use crate::numeric::{mean, std_dev};
use crate::prior::GaussianPrior;
use crate::seeds::{stream, Phase};

pub use chib::{chib_jeliazkov, ChibOutcome};
pub use power::{
    controlled_mean, cti, stepping_stones, thermodynamic_integration, ti_improved_trapezoid, zv_controls,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ChibJeliazkov,
    Ti,
    Cti,
    SteppingStones,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::ChibJeliazkov, Method::Ti, Method::Cti, Method::SteppingStones];

    pub fn name(self) -> &'static str {
        match self {
            Method::ChibJeliazkov => "chib-jeliazkov",
            Method::Ti => "ti",
            Method::Cti => "cti",
            Method::SteppingStones => "stepping-stones",
        }
    }

    fn uses_power_posteriors(self) -> bool {
        self != Method::ChibJeliazkov
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "chib-jeliazkov" | "chib" | "cj" => Ok(Method::ChibJeliazkov),
            "ti" | "power-posterior" => Ok(Method::Ti),
            "cti" => Ok(Method::Cti),
            "stepping-stones" | "ss" => Ok(Method::SteppingStones),
            other => Err(Error::Config(format!(
                "unknown evidence method `{other}` (expected chib-jeliazkov, ti, cti or stepping-stones)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvidenceSettings {
    /// Random-walk scale; `None` means `2.38/√d`.
    pub lambda: Option<f64>,
    pub chib_chain: ChainSettings,
    pub chib_proposal_draws: usize,
    /// Ordinate point; `None` means the posterior sample mean.
    pub theta_star: Option<Vec<f64>>,
    pub ladder: LadderSpec,
    pub rung_chain: ChainSettings,
    pub cti_degree: u8,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for EvidenceSettings {
    fn default() -> Self {
        Self {
            lambda: None,
            chib_chain: ChainSettings {
                draws: 100_000,
                burn_in: 5000,
            },
            chib_proposal_draws: 100_000,
            theta_star: None,
            ladder: LadderSpec { rungs: 100, power: 5.0 },
            rung_chain: ChainSettings {
                draws: 30_000,
                burn_in: 5000,
            },
            cti_degree: 2,
            replicates: 10,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceEstimate {
    pub method: Method,
    /// Mean over replicates.
    pub log_evidence: f64,
    /// Standard deviation over replicates; absent for a single run.
    pub replicate_sd: Option<f64>,
    pub replicates: Vec<f64>,
    pub seconds: f64,
    pub settings: EvidenceSettings,
}

impl EvidenceEstimate {
    fn from_replicates(method: Method, values: Vec<f64>, seconds: f64, settings: &EvidenceSettings) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("evidence estimate"));
        }
        Ok(Self {
            method,
            log_evidence: mean(&values),
            replicate_sd: (values.len() > 1).then(|| std_dev(&values)),
            replicates: values,
            seconds,
            settings: settings.clone(),
        })
    }
}

/// `log BF = log π(y|M_a) − log π(y|M_b)`.
pub fn log_bayes_factor(a: &EvidenceEstimate, b: &EvidenceEstimate) -> f64 {
    a.log_evidence - b.log_evidence
}

pub fn bayes_factor(a: &EvidenceEstimate, b: &EvidenceEstimate) -> f64 {
    log_bayes_factor(a, b).exp()
}

/// Per-replicate Bayes factors `exp(a_r − b_r)` for two estimates run with
/// the same replicate count; returns (mean, sd).
pub fn replicate_bayes_factor(a: &EvidenceEstimate, b: &EvidenceEstimate) -> Result<(f64, Option<f64>)> {
    if a.replicates.len() != b.replicates.len() {
        return Err(Error::Invalid("estimates have different replicate counts".into()));
    }
    let bf: Vec<f64> = a.replicates.iter().zip(&b.replicates).map(|(x, y)| (x - y).exp()).collect();
    Ok((mean(&bf), (bf.len() > 1).then(|| std_dev(&bf))))
}

/// A posterior ready for evidence estimation: likelihood surrogate, prior,
/// a starting point near the mode, and the negative Hessian there.
pub struct PosteriorTarget<'a> {
    pub likelihood: &'a dyn LogLikelihood,
    pub prior: &'a GaussianPrior,
    pub mode: Vec<f64>,
    pub curvature: DMatrix<f64>,
}

impl PosteriorTarget<'_> {
    pub fn proposal_covariance(&self, lambda: Option<f64>) -> Result<DMatrix<f64>> {
        let d = self.mode.len();
        crate::mcmc::proposal_covariance(&crate::mcmc::ProposalSpec {
            lambda: lambda.unwrap_or_else(|| crate::mcmc::default_lambda(d)),
            prior_precision: self.prior.precision().clone(),
            curvature: self.curvature.clone(),
        })
    }
}

/// One replicate of every requested method. Power-posterior methods share
/// a single set of rung samples.
pub fn evidence_replicate(
    target: &PosteriorTarget<'_>,
    methods: &[Method],
    settings: &EvidenceSettings,
    replicate: u64,
) -> Result<Vec<(Method, f64)>> {
    let cov = target.proposal_covariance(settings.lambda)?;
    let mut out = Vec::new();
    if methods.iter().any(|m| m.uses_power_posteriors()) {
        let ladder = TemperatureLadder::from_spec(settings.ladder)?;
        let rungs = run_power_posterior_chains(
            target.likelihood,
            target.prior,
            &ladder,
            &cov,
            &target.mode,
            &settings.rung_chain,
            settings.seed,
            replicate,
        )
        .map_err(|e| e.in_phase("power posteriors"))?;
        for &m in methods {
            let v = match m {
                Method::Ti => thermodynamic_integration(&rungs, &ladder)?,
                Method::Cti => cti(&rungs, &ladder, settings.cti_degree)?,
                Method::SteppingStones => stepping_stones(&rungs, &ladder)?,
                Method::ChibJeliazkov => continue,
            };
            out.push((m, v));
        }
    }
    if methods.contains(&Method::ChibJeliazkov) {
        let mut rng = stream(settings.seed, Phase::Chib, replicate, 0);
        let cj = chib_jeliazkov(
            target.likelihood,
            target.prior,
            &cov,
            &target.mode,
            settings.theta_star.as_deref(),
            &settings.chib_chain,
            settings.chib_proposal_draws,
            &mut rng,
        )
        .map_err(|e| e.in_phase("chib-jeliazkov"))?;
        out.push((Method::ChibJeliazkov, cj.log_evidence));
    }
    out.sort_by_key(|(m, _)| *m);
    Ok(out)
}

/// `settings.replicates` independent seeded replicates of each method.
pub fn estimate_evidence(
    target: &PosteriorTarget<'_>,
    methods: &[Method],
    settings: &EvidenceSettings,
) -> Result<Vec<EvidenceEstimate>> {
    if settings.replicates == 0 {
        return Err(Error::Config("replicates must be at least 1".into()));
    }
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();
    let start = Instant::now();
    let runs: Vec<Vec<(Method, f64)>> = (0..settings.replicates as u64)
        .into_par_iter()
        .map(|r| evidence_replicate(target, &methods, settings, r))
        .collect::<Result<_>>()?;
    let seconds = start.elapsed().as_secs_f64();
    methods
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let values = runs.iter().map(|run| run[k].1).collect();
            EvidenceEstimate::from_replicates(m, values, seconds, settings)
        })
        .collect()
}
