//! Command-line front end.

mod config;
mod data;
mod oracle;
mod report;
mod study;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::calibration::{build_adjusted, AdjustedLikelihood, AdjustmentArtifact, AdjustmentInput};
use crate::error::{Error, Result};
use crate::evidence::{estimate_evidence, PosteriorTarget};
use crate::mcmc::rw_metropolis;
use crate::pseudolikelihood::{mple, DEFAULT_MPLE_MAX_ITER, DEFAULT_MPLE_TOL};
use crate::seeds::{stream, Phase};

pub use config::{AdjustConfig, EvidenceConfig, PriorConfig, RunConfig};
pub use data::Dataset;
pub use oracle::edges_only_log_evidence;
pub use report::{
    read_report, write_json, BayesFactorReport, BayesFactorRow, EvidenceReport, REPORT_SCHEMA_VERSION,
};
pub use study::{run_potts_study, PottsStudyReport, PottsStudyRow, PottsStudySettings};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "GRF_THREADS";

#[derive(Debug, Parser)]
#[command(name = "grf-evidence", version, about = "Evidence and Bayes factors for Gibbs random fields via adjusted pseudolikelihoods")]
pub struct Cli {
    /// TOML run configuration; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for every Monte Carlo phase.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct DataArgs {
    /// Edge list (one-based `i j` pairs).
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Node covariates CSV with a header row.
    #[arg(long)]
    pub covariates: Option<PathBuf>,
    /// Model spec, e.g. "edges + gwesp(0.2)".
    #[arg(long)]
    pub model: Option<String>,
    /// Lattice CSV with cells in 1..=S.
    #[arg(long, conflicts_with_all = ["network", "covariates"])]
    pub lattice: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub states: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the adjustment artifact for one model and dataset.
    Adjust {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        mcmle_draws: Option<usize>,
        #[arg(long)]
        mcmle_iterations: Option<usize>,
        #[arg(long)]
        moment_draws: Option<usize>,
        #[arg(long)]
        path_rungs: Option<usize>,
        #[arg(long)]
        path_draws: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        thin: Option<usize>,
    },
    /// Estimate the evidence of an adjusted (or raw) pseudo-posterior.
    Evidence {
        #[arg(long)]
        artifact: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// chib-jeliazkov, ti, cti, stepping-stones or all; repeatable.
        #[arg(long = "method")]
        methods: Vec<String>,
        #[arg(long)]
        replicates: Option<usize>,
        /// Use the raw pseudolikelihood instead of the adjusted one.
        #[arg(long)]
        unadjusted: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bayes factor between two evidence reports of the same data.
    Bf {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact-truth validation study on simulated Potts lattices.
    PottsStudy {
        #[arg(long)]
        height: Option<usize>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        states: Option<u8>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        datasets: Option<usize>,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        grid_max: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Plot-ready CSV of the per-dataset evidences.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sample the adjusted posterior and export the chain as CSV.
    SamplePosterior {
        #[arg(long)]
        artifact: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 10_000)]
        draws: usize,
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact reference values for small problems.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Exact Potts log partition function (and enumeration when feasible).
    PottsPartition {
        #[arg(long)]
        height: usize,
        #[arg(long)]
        width: usize,
        #[arg(long, default_value_t = 2)]
        states: u8,
        #[arg(long)]
        theta: f64,
    },
    /// Quadrature evidence of an edges-only ERGM.
    EdgesEvidence {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long, default_value_t = 0.0)]
        prior_mean: f64,
        #[arg(long, default_value_t = 100.0)]
        prior_variance: f64,
    },
}

fn load_dataset(data: &DataArgs, model: Option<&str>) -> Result<Dataset> {
    match (&data.network, &data.lattice) {
        (Some(edges), None) => {
            let spec = data
                .model
                .as_deref()
                .or(model)
                .ok_or_else(|| Error::Config("a network needs a model spec (--model or `model` in the config)".into()))?;
            Dataset::network(edges, data.covariates.as_deref(), spec)
        }
        (None, Some(path)) => Dataset::lattice(path, data.states),
        _ => Err(Error::Config("give exactly one of --network or --lattice".into())),
    }
}

/// Loads the data behind an artifact and checks that it is the same data
/// and model.
fn dataset_for(artifact: &AdjustmentArtifact, data: &DataArgs) -> Result<Dataset> {
    let ds = load_dataset(data, Some(&artifact.model))?;
    if ds.hash() != artifact.data_hash {
        return Err(Error::DataMismatch(ds.hash(), artifact.data_hash.clone()));
    }
    if ds.model_label() != artifact.model {
        return Err(Error::Invalid(format!(
            "artifact was built for `{}`, not `{}`",
            artifact.model,
            ds.model_label()
        )));
    }
    Ok(ds)
}

fn output_path(cfg: &RunConfig, given: Option<&Path>, default: &str) -> PathBuf {
    given.map_or_else(|| cfg.output_dir.join(default), Path::to_path_buf)
}

/// Evidence report for one artifact and its data.
pub fn evidence_report(
    artifact: &AdjustmentArtifact,
    dataset: &Dataset,
    cfg: &RunConfig,
    unadjusted: bool,
) -> Result<EvidenceReport> {
    let surface = dataset.surface()?;
    let prior = cfg.prior.build(artifact.dim())?;
    let methods = cfg.evidence.methods()?;
    let settings = cfg.evidence.settings(cfg.seed);
    let (lik, mode, curvature) = if unadjusted {
        let m = mple(&surface, &artifact.theta_mple, DEFAULT_MPLE_TOL, DEFAULT_MPLE_MAX_ITER)?;
        let h = -surface.hessian(&m.theta);
        (AdjustedLikelihood::unadjusted(surface), m.theta.into_vec(), h)
    } else {
        (
            AdjustedLikelihood::new(artifact, surface)?,
            artifact.theta_mle.to_vec(),
            artifact.stat_cov_matrix(),
        )
    };
    let target = PosteriorTarget {
        likelihood: &lik,
        prior: &prior,
        mode,
        curvature,
    };
    let estimates = estimate_evidence(&target, &methods, &settings)?;
    Ok(EvidenceReport {
        schema_version: REPORT_SCHEMA_VERSION,
        model: artifact.model.clone(),
        data_hash: artifact.data_hash.clone(),
        adjusted: !unadjusted,
        prior,
        estimates,
    })
}

pub fn timing_table(a: &AdjustmentArtifact) -> String {
    let t = a.timings;
    format!(
        "{:<10} {:>10} {:>10}\n{:<10} {:>10.4} {:>10.3}\n{:<10} {:>10.4} {:>10.3}\n{:<10} {:>10.4} {:>10.3}\n{:<10} {:>10.4} {:>10.3}\n",
        "phase", "minutes", "seconds",
        "mode", t.mode / 60.0, t.mode,
        "curvature", t.curvature / 60.0, t.curvature,
        "magnitude", t.magnitude / 60.0, t.magnitude,
        "total", t.total / 60.0, t.total,
    )
}

/// Runs one parsed command line; all user-visible output goes to stdout.
pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.threads {
        // a pool may already exist when `run` is called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match cli.command {
        Command::Adjust {
            data,
            out,
            mcmle_draws,
            mcmle_iterations,
            moment_draws,
            path_rungs,
            path_draws,
            burn_in,
            thin,
        } => {
            let a = &mut cfg.adjust;
            let overrides = [
                (&mut a.mcmle_draws, mcmle_draws),
                (&mut a.mcmle_iterations, mcmle_iterations),
                (&mut a.moment_draws, moment_draws),
                (&mut a.path_rungs, path_rungs),
                (&mut a.path_draws, path_draws),
                (&mut a.burn_in, burn_in),
                (&mut a.thin, thin),
            ];
            for (slot, v) in overrides {
                if let Some(v) = v {
                    *slot = v;
                }
            }
            let ds = load_dataset(&data, cfg.model.as_deref())?;
            let sampler = ds.sampler(&cfg.adjust)?;
            let surface = ds.surface()?;
            let input = AdjustmentInput {
                sampler: sampler.as_ref(),
                surface: &surface,
                observed: ds.observed()?,
                model: ds.model_label(),
                data_hash: ds.hash(),
            };
            let artifact = build_adjusted(&input, &cfg.adjust.settings(cfg.seed))?;
            let path = output_path(&cfg, out.as_deref(), "artifact.json");
            artifact.save(&path)?;
            println!("model: {}  (d = {})", artifact.model, artifact.dim());
            println!("MPLE {:?}\nMLE  {:?}\nlog C {:.6}", artifact.theta_mple.as_slice(), artifact.theta_mle.as_slice(), artifact.log_c);
            print!("{}", timing_table(&artifact));
            println!("artifact written to {}", path.display());
        }
        Command::Evidence {
            artifact,
            data,
            methods,
            replicates,
            unadjusted,
            out,
        } => {
            if !methods.is_empty() {
                cfg.evidence.methods = methods;
            }
            if let Some(r) = replicates {
                cfg.evidence.replicates = r;
            }
            cfg.evidence.methods()?;
            let artifact = AdjustmentArtifact::load(&artifact)?;
            let ds = dataset_for(&artifact, &data)?;
            let report = evidence_report(&artifact, &ds, &cfg, unadjusted)?;
            let path = output_path(&cfg, out.as_deref(), "evidence.json");
            write_json(&report, &path)?;
            print!("{}", report.table());
            println!("report written to {}", path.display());
        }
        Command::Bf { a, b, out } => {
            let ra: EvidenceReport = read_report(&a)?;
            let rb: EvidenceReport = read_report(&b)?;
            let report = BayesFactorReport::compare(&ra, &rb)?;
            let path = output_path(&cfg, out.as_deref(), "bayes_factor.json");
            write_json(&report, &path)?;
            print!("{}", report.table());
            println!("report written to {}", path.display());
        }
        Command::PottsStudy {
            height,
            width,
            states,
            theta,
            datasets,
            grid_points,
            grid_max,
            out,
            csv,
        } => {
            let d = PottsStudySettings::default();
            let settings = PottsStudySettings {
                height: height.unwrap_or(d.height),
                width: width.unwrap_or(d.width),
                states: states.unwrap_or(d.states),
                theta: theta.unwrap_or(d.theta),
                datasets: datasets.unwrap_or(d.datasets),
                grid_points: grid_points.unwrap_or(d.grid_points),
                grid_max: grid_max.unwrap_or(d.grid_max),
                adjust: cfg.adjust.settings(cfg.seed),
                seed: cfg.seed,
                ..d
            };
            let report = run_potts_study(&settings)?;
            let path = output_path(&cfg, out.as_deref(), "potts_study.json");
            write_json(&report, &path)?;
            if let Some(c) = csv {
                std::fs::write(c, report.to_csv())?;
            }
            print!("{}", report.table());
            println!("report written to {}", path.display());
        }
        Command::SamplePosterior {
            artifact,
            data,
            draws,
            burn_in,
            out,
        } => {
            let artifact = AdjustmentArtifact::load(&artifact)?;
            let ds = dataset_for(&artifact, &data)?;
            let lik = AdjustedLikelihood::new(&artifact, ds.surface()?)?;
            let prior = cfg.prior.build(artifact.dim())?;
            let target = PosteriorTarget {
                likelihood: &lik,
                prior: &prior,
                mode: artifact.theta_mle.to_vec(),
                curvature: artifact.stat_cov_matrix(),
            };
            let cov = target.proposal_covariance(cfg.evidence.lambda)?;
            let density = |t: &[f64]| {
                use crate::calibration::LogLikelihood;
                lik.log_likelihood(t) + prior.log_density(t)
            };
            let settings = crate::mcmc::ChainSettings { draws, burn_in };
            let chain = rw_metropolis(&density, &target.mode, &cov, &settings, &mut stream(cfg.seed, Phase::Posterior, 0, 0))?;
            chain.write_csv(&out, cfg.seed)?;
            println!(
                "{} draws, acceptance rate {:.3}, posterior mean {:?}",
                chain.len(),
                chain.acceptance_rate(),
                chain.mean()
            );
        }
        Command::Oracle(OracleCommand::PottsPartition {
            height,
            width,
            states,
            theta,
        }) => {
            let exact = crate::potts::exact_log_partition(height, width, states, theta)?;
            println!("exact recursion  log z = {exact:.12}");
            let model = crate::potts::PottsModel { height, width, states };
            let th = crate::model::Theta::new(vec![theta])?;
            match crate::model::brute_force_log_partition(&model, &th, crate::model::DEFAULT_ENUMERATION_CAP) {
                Ok(v) => println!("enumeration      log z = {v:.12}"),
                Err(e) => println!("enumeration skipped: {e}"),
            }
        }
        Command::Oracle(OracleCommand::EdgesEvidence {
            nodes,
            edges,
            prior_mean,
            prior_variance,
        }) => {
            let dyads = nodes * nodes.saturating_sub(1) / 2;
            if edges > dyads {
                return Err(Error::Invalid(format!("{edges} edges exceed {dyads} dyads")));
            }
            let v = edges_only_log_evidence(dyads, edges, prior_mean, prior_variance)?;
            println!("log evidence = {v:.10}");
        }
    }
    Ok(())
}
