//! Helpers and independent reference computations shared by the
//! integration suites and the acceptance gate.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use grf_evidence::calibration::{
    build_adjusted, AdjustedLikelihood, AdjustmentArtifact, AdjustmentInput, AdjustmentSettings, LadderSpec,
    LogLikelihood, McmleSettings,
};
use grf_evidence::ergm::{network_stats, ErgmModel, ErgmSampler, ModelSpec, NetworkGraph, TntChain};
use grf_evidence::pseudolikelihood::PlSurface;
use grf_evidence::seeds::{stream, Phase};
use grf_evidence::Theta;
use nalgebra::DMatrix;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

/// `n` nodes with the first `m` dyads (lexicographic) present.
pub fn first_dyads(n: usize, m: usize) -> NetworkGraph {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).take(m).collect();
    NetworkGraph::from_edges(n, &pairs).unwrap()
}

pub struct ErgmFixture {
    pub graph: NetworkGraph,
    pub spec: ModelSpec,
    pub sampler: ErgmSampler,
    pub surface: PlSurface,
}

impl ErgmFixture {
    pub fn new(graph: NetworkGraph, spec: &str) -> Self {
        let spec: ModelSpec = spec.parse().unwrap();
        let model = ErgmModel::new(&spec, &graph).unwrap();
        let surface = PlSurface::ergm(&model, &graph).unwrap();
        let sampler = ErgmSampler::new(model, graph.clone());
        Self {
            graph,
            spec,
            sampler,
            surface,
        }
    }

    pub fn adjust(&self, settings: &AdjustmentSettings) -> AdjustmentArtifact {
        let input = AdjustmentInput {
            sampler: &self.sampler,
            surface: &self.surface,
            observed: network_stats(&self.graph, &self.spec).unwrap(),
            model: self.spec.to_string(),
            data_hash: "fixture".into(),
        };
        build_adjusted(&input, settings).unwrap()
    }
}

/// Modest settings for tests that only need a well-formed artifact.
pub fn quick_settings(seed: u64) -> AdjustmentSettings {
    AdjustmentSettings {
        mcmle: McmleSettings {
            draws: 1000,
            iterations: 8,
            ..McmleSettings::default()
        },
        moment_draws: 1000,
        path_ladder: LadderSpec { rungs: 20, power: 1.0 },
        path_draws: 300,
        seed,
    }
}

/// Central finite-difference gradient.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[k] += h;
            b[k] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

/// Central finite-difference Hessian.
pub fn fd_hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> DMatrix<f64> {
    let d = x.len();
    let mut out = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let eval = |si: f64, sj: f64| {
                let mut y = x.to_vec();
                y[i] += si * h;
                y[j] += sj * h;
                f(&y)
            };
            out[(i, j)] = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0)) / (4.0 * h * h);
        }
    }
    out
}

/// All graphs on `n` nodes, indexed by the bitmask over dyads in
/// lexicographic order.
pub fn all_graphs(n: usize) -> Vec<NetworkGraph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    (0..1u32 << pairs.len())
        .map(|mask| {
            let chosen: Vec<_> = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, p)| *p).collect();
            NetworkGraph::from_edges(n, &chosen).unwrap()
        })
        .collect()
}

pub fn graph_index(g: &NetworkGraph) -> usize {
    let n = g.node_count();
    let mut bit = 0;
    let mut idx = 0;
    for i in 0..n {
        for j in i + 1..n {
            if g.has_edge(i, j) {
                idx |= 1 << bit;
            }
            bit += 1;
        }
    }
    idx
}

/// Exact ERGM probabilities over every graph on `n` nodes, with statistics
/// recomputed from scratch.
pub fn exact_graph_distribution(spec: &ModelSpec, n: usize, theta: &[f64]) -> Vec<f64> {
    let graphs = all_graphs(n);
    let logw: Vec<f64> = graphs
        .iter()
        .map(|g| {
            let s = network_stats(g, spec).unwrap();
            s.iter().zip(theta).map(|(a, b)| a * b).sum()
        })
        .collect();
    let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|v| v / z).collect()
}

/// Total-variation distance between the tie-no-tie chain's empirical
/// distribution on 3-node graphs and the exact one.
pub fn tnt_total_variation(steps: usize, seed: u64) -> f64 {
    let spec: ModelSpec = "edges + gwesp(0.5) + gwd(0.3)".parse().unwrap();
    let theta = [-0.4, 0.6, -0.3];
    let start = NetworkGraph::empty(3);
    let model = ErgmModel::new(&spec, &start).unwrap();
    let exact = exact_graph_distribution(&spec, 3, &theta);
    let mut chain = TntChain::new(&model, start, 0.5);
    let mut rng = stream(seed, Phase::Data, 0, 0);
    let mut counts = vec![0usize; exact.len()];
    for _ in 0..1000 {
        chain.step(&theta, &mut rng);
    }
    for _ in 0..steps {
        chain.step(&theta, &mut rng);
        counts[graph_index(chain.graph())] += 1;
    }
    counts
        .iter()
        .zip(&exact)
        .map(|(&c, p)| (c as f64 / steps as f64 - p).abs())
        .sum::<f64>()
        / 2.0
}

/// Worst violation of `πP = π` and of detailed balance for the exhaustive
/// tie-no-tie transition matrix on 3-node graphs.
pub fn tnt_balance_error() -> (f64, f64) {
    let spec: ModelSpec = "edges + gwesp(0.5) + gwd(0.3)".parse().unwrap();
    let theta = [0.3, -0.8, 0.5];
    let graphs = all_graphs(3);
    let model = ErgmModel::new(&spec, &graphs[0]).unwrap();
    let pi = exact_graph_distribution(&spec, 3, &theta);
    let k = graphs.len();
    let mut p = DMatrix::<f64>::zeros(k, k);
    for (a, g) in graphs.iter().enumerate() {
        let chain = TntChain::new(&model, g.clone(), 0.5);
        let mut stay = 1.0;
        for i in 0..3 {
            for j in i + 1..3 {
                let mut h = g.clone();
                h.toggle(i, j);
                let prob = chain.toggle_probability(i, j, &theta);
                p[(a, graph_index(&h))] = prob;
                stay -= prob;
            }
        }
        p[(a, a)] = stay;
    }
    let mut stationary = 0.0f64;
    for b in 0..k {
        let v: f64 = (0..k).map(|a| pi[a] * p[(a, b)]).sum();
        stationary = stationary.max((v - pi[b]).abs());
    }
    let mut balance = 0.0f64;
    for a in 0..k {
        for b in 0..k {
            balance = balance.max((pi[a] * p[(a, b)] - pi[b] * p[(b, a)]).abs());
        }
    }
    (stationary, balance)
}

/// Largest finite-difference discrepancies of the adjusted log-likelihood:
/// (analytic gradient vs FD at several points, |FD gradient| at the MLE,
/// relative Frobenius error of the FD Hessian at the MLE against −V̂[s]).
pub fn adjusted_derivative_errors(artifact: &AdjustmentArtifact, surface: &PlSurface) -> (f64, f64, f64) {
    let lik = AdjustedLikelihood::new(artifact, surface.clone()).unwrap();
    let f = |t: &[f64]| lik.log_likelihood(t);
    let mle = artifact.theta_mle.to_vec();
    let mut grad_err = 0.0f64;
    for shift in [-0.3, 0.0, 0.2] {
        let x: Vec<f64> = mle.iter().enumerate().map(|(k, v)| v + shift * (k as f64 + 1.0) / 2.0).collect();
        let mut g = vec![0.0; x.len()];
        lik.value_and_gradient(&x, &mut g);
        let fd = fd_gradient(&f, &x, 1e-5);
        let scale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in g.iter().zip(&fd) {
            grad_err = grad_err.max((a - b).abs() / scale);
        }
    }
    let mode_grad = fd_gradient(&f, &mle, 1e-5).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = fd_hessian(&f, &mle, 1e-4);
    let target = -artifact.stat_cov_matrix();
    let hess_err = (&h - &target).norm() / target.norm();
    (grad_err, mode_grad, hess_err)
}

/// |magnitude residual| and |g(θ̂_MLE) − θ̂_MPLE|.
pub fn artifact_identity_errors(artifact: &AdjustmentArtifact, surface: &PlSurface) -> (f64, f64) {
    let lik = AdjustedLikelihood::new(artifact, surface.clone()).unwrap();
    let mle = artifact.theta_mle.to_vec();
    let magnitude = mle.iter().zip(artifact.observed.iter()).map(|(a, b)| a * b).sum::<f64>() - artifact.log_z_at_mle;
    let mag_err = (lik.log_likelihood(&mle) - magnitude).abs();
    let mapped = artifact.map(&mle);
    let mode_err = mapped
        .iter()
        .zip(artifact.theta_mple.iter())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    (mag_err, mode_err)
}

pub fn theta(v: &[f64]) -> Theta {
    Theta::new(v.to_vec()).unwrap()
}

/// Prints one acceptance line and returns whether it passed.
pub fn report(name: &str, pass: bool, detail: &str) -> bool {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

/// `log ∫ exp{kθ − N log(1+e^θ)} N(θ; 0, v) dθ` by composite Simpson on a
/// window of ±12 posterior-scale widths around the mode.
pub fn edges_only_log_evidence(dyads: usize, edges: usize, prior_var: f64) -> f64 {
    let (n, k) = (dyads as f64, edges as f64);
    let log_joint = |t: f64| {
        k * t - n * (t.exp().ln_1p()) - t * t / (2.0 * prior_var) - 0.5 * (2.0 * std::f64::consts::PI * prior_var).ln()
    };
    let centre = (k / (n - k)).ln();
    let width = 12.0 * (n / (k * (n - k))).sqrt();
    let (a, b) = (centre - width, centre + width);
    let m = 20_000;
    let h = (b - a) / m as f64;
    let peak = log_joint(centre);
    let mut acc = 0.0;
    for i in 0..=m {
        let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * (log_joint(a + i as f64 * h) - peak).exp();
    }
    peak + (acc * h / 3.0).ln()
}
