use rand::Rng as _;

use crate::error::{Error, Result};
use crate::model::{check_dim, LikelihoodSampler, StatVector, Theta};
use crate::numeric::dot;
use crate::seeds::Rng;

use super::graph::NetworkGraph;
use super::stats::ErgmModel;

/// Tie-no-tie Metropolis–Hastings chain over graphs.
///
/// Each step proposes, with probability `p_edge`, to delete a uniformly chosen
/// edge and otherwise to add a uniformly chosen non-edge. An edgeless graph
/// always proposes an addition and a complete graph always a deletion; the
/// acceptance ratio includes the resulting proposal asymmetry, so `f(y|θ)` is
/// stationary in all cases.
#[derive(Debug, Clone)]
pub struct TntChain<'m> {
    model: &'m ErgmModel,
    graph: NetworkGraph,
    edges: Vec<(u32, u32)>,
    non_edges: Vec<(u32, u32)>,
    slot: Vec<u32>,
    stats: Vec<f64>,
    delta: Vec<f64>,
    p_edge: f64,
    steps: u64,
    accepted: u64,
}

impl<'m> TntChain<'m> {
    pub fn new(model: &'m ErgmModel, start: NetworkGraph, p_edge: f64) -> Self {
        assert!(p_edge > 0.0 && p_edge < 1.0, "p_edge must lie in (0, 1)");
        let n = start.node_count();
        let mut slot = vec![u32::MAX; n * n];
        let (mut edges, mut non_edges) = (Vec::new(), Vec::new());
        for i in 0..n {
            for j in i + 1..n {
                let list = if start.has_edge(i, j) { &mut edges } else { &mut non_edges };
                slot[i * n + j] = list.len() as u32;
                list.push((i as u32, j as u32));
            }
        }
        let stats = model.stats(&start).into_vec();
        let d = stats.len();
        Self {
            model,
            graph: start,
            edges,
            non_edges,
            slot,
            stats,
            delta: vec![0.0; d],
            p_edge,
            steps: 0,
            accepted: 0,
        }
    }

    pub fn graph(&self) -> &NetworkGraph {
        &self.graph
    }

    /// Statistics of the current graph, maintained incrementally.
    pub fn stats(&self) -> &[f64] {
        &self.stats
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepted as f64 / self.steps as f64
        }
    }

    fn edge_branch_probability(&self, edges: usize) -> f64 {
        let total = self.edges.len() + self.non_edges.len();
        if edges == 0 {
            0.0
        } else if edges == total {
            1.0
        } else {
            self.p_edge
        }
    }

    /// Log Metropolis–Hastings ratio for toggling a dyad whose change
    /// statistics have inner product `energy` with θ.
    fn log_ratio(&self, remove: bool, energy: f64) -> f64 {
        let total = self.edges.len() + self.non_edges.len();
        let e = self.edges.len();
        let pe = self.edge_branch_probability(e);
        let other_count = if remove { e - 1 } else { e + 1 };
        let pe_after = self.edge_branch_probability(other_count);
        if remove {
            let forward = pe / e as f64;
            let reverse = (1.0 - pe_after) / (total - other_count) as f64;
            -energy + (reverse / forward).ln()
        } else {
            let forward = (1.0 - pe) / (total - e) as f64;
            let reverse = pe_after / other_count as f64;
            energy + (reverse / forward).ln()
        }
    }

    /// Probability that one step from the current graph toggles dyad `(i, j)`.
    pub fn toggle_probability(&self, i: usize, j: usize, theta: &[f64]) -> f64 {
        let (i, j) = (i.min(j), i.max(j));
        let remove = self.graph.has_edge(i, j);
        let e = self.edges.len();
        let pe = self.edge_branch_probability(e);
        let proposal = if remove {
            pe / e as f64
        } else {
            (1.0 - pe) / self.non_edges.len() as f64
        };
        let mut delta = vec![0.0; self.stats.len()];
        self.model.change_stats_into(&self.graph, i, j, &mut delta);
        proposal * self.log_ratio(remove, dot(theta, &delta)).exp().min(1.0)
    }

    /// One proposal; returns whether it was accepted.
    pub fn step(&mut self, theta: &[f64], rng: &mut Rng) -> bool {
        let total = self.edges.len() + self.non_edges.len();
        if total == 0 {
            return false;
        }
        self.steps += 1;
        let e = self.edges.len();
        let pe = self.edge_branch_probability(e);
        let remove = rng.gen::<f64>() < pe;
        let list = if remove { &self.edges } else { &self.non_edges };
        let idx = rng.gen_range(0..list.len());
        let (i, j) = list[idx];
        let (i, j) = (i as usize, j as usize);
        self.model.change_stats_into(&self.graph, i, j, &mut self.delta);
        let log_ratio = self.log_ratio(remove, dot(theta, &self.delta));
        if log_ratio < 0.0 && rng.gen::<f64>().ln() >= log_ratio {
            return false;
        }
        self.accepted += 1;
        let n = self.graph.node_count();
        let (from, to) = if remove {
            (&mut self.edges, &mut self.non_edges)
        } else {
            (&mut self.non_edges, &mut self.edges)
        };
        from.swap_remove(idx);
        if let Some(&(a, b)) = from.get(idx) {
            self.slot[a as usize * n + b as usize] = idx as u32;
        }
        self.slot[i * n + j] = to.len() as u32;
        to.push((i as u32, j as u32));
        self.graph.toggle(i, j);
        let sign = if remove { -1.0 } else { 1.0 };
        for (s, d) in self.stats.iter_mut().zip(&self.delta) {
            *s += sign * d;
        }
        true
    }
}

/// Statistics of `count` graphs from a tie-no-tie chain started at `start`,
/// recorded every `thin` steps after `burn_in` steps.
#[allow(clippy::too_many_arguments)]
pub fn simulate_networks(
    model: &ErgmModel,
    start: &NetworkGraph,
    theta: &Theta,
    count: usize,
    burn_in: usize,
    thin: usize,
    p_edge: f64,
    rng: &mut Rng,
) -> Result<Vec<StatVector>> {
    check_dim(model.spec().dim(), theta.dim())?;
    if count == 0 || thin == 0 {
        return Err(Error::Invalid("count and thin must be at least 1".into()));
    }
    if start.node_count() != model.node_count() {
        return Err(Error::DimensionMismatch {
            expected: model.node_count(),
            got: start.node_count(),
        });
    }
    let mut chain = TntChain::new(model, start.clone(), p_edge);
    for _ in 0..burn_in {
        chain.step(theta, rng);
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..thin {
            chain.step(theta, rng);
        }
        out.push(StatVector::from_raw(chain.stats().to_vec()));
    }
    Ok(out)
}

/// [`LikelihoodSampler`] backed by the tie-no-tie chain.
#[derive(Debug, Clone)]
pub struct ErgmSampler {
    pub model: ErgmModel,
    /// Starting graph of every chain; usually the observed network.
    pub start: NetworkGraph,
    pub burn_in: usize,
    pub thin: usize,
    pub p_edge: f64,
}

impl ErgmSampler {
    pub fn new(model: ErgmModel, start: NetworkGraph) -> Self {
        Self {
            model,
            start,
            burn_in: 5000,
            thin: 50,
            p_edge: 0.5,
        }
    }
}

impl LikelihoodSampler for ErgmSampler {
    fn dim(&self) -> usize {
        self.model.spec().dim()
    }

    fn log_z_zero(&self) -> f64 {
        self.start.dyad_count() as f64 * std::f64::consts::LN_2
    }

    fn sample_stats(&self, theta: &Theta, count: usize, rng: &mut Rng) -> Result<Vec<StatVector>> {
        simulate_networks(
            &self.model,
            &self.start,
            theta,
            count,
            self.burn_in,
            self.thin,
            self.p_edge,
            rng,
        )
    }
}
