use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{GrfModel, StatVector};

use super::graph::NetworkGraph;
use super::terms::{ModelSpec, ModelTerm};

/// A [`ModelSpec`] bound to a node set: covariates are resolved to integer
/// classes and geometric weight tables are precomputed.
#[derive(Debug, Clone)]
pub struct ErgmModel {
    spec: ModelSpec,
    template: NetworkGraph,
    terms: Vec<CompiledTerm>,
}

#[derive(Debug, Clone)]
enum CompiledTerm {
    Edges,
    /// `weight[k] = e^φ (1 - r^k)` and `rpow[k] = r^k`, `r = 1 - e^{-φ}`.
    Geometric {
        shared_partners: bool,
        weight: Vec<f64>,
        rpow: Vec<f64>,
    },
    Nodematch { class: Vec<u32> },
}

fn geometric_tables(decay: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let r = -(-decay).exp_m1();
    let rpow: Vec<f64> = (0..=n).map(|k| r.powi(k as i32)).collect();
    let weight = rpow.iter().map(|p| decay.exp() * (1.0 - p)).collect();
    (weight, rpow)
}

impl ErgmModel {
    /// Binds `spec` to the nodes (and covariates) of `graph`.
    pub fn new(spec: &ModelSpec, graph: &NetworkGraph) -> Result<Self> {
        let n = graph.node_count();
        let mut terms = Vec::with_capacity(spec.dim());
        for term in spec.terms() {
            terms.push(match term {
                ModelTerm::Edges => CompiledTerm::Edges,
                ModelTerm::Gwesp { decay } | ModelTerm::Gwd { decay } => {
                    let (weight, rpow) = geometric_tables(*decay, n);
                    CompiledTerm::Geometric {
                        shared_partners: matches!(term, ModelTerm::Gwesp { .. }),
                        weight,
                        rpow,
                    }
                }
                ModelTerm::Nodematch { covariates } => {
                    let columns = covariates
                        .iter()
                        .map(|c| graph.covariate(c))
                        .collect::<Result<Vec<_>>>()?;
                    let mut ids: HashMap<Vec<&str>, u32> = HashMap::new();
                    let class = (0..n)
                        .map(|i| {
                            let key: Vec<&str> = columns.iter().map(|c| c[i].as_str()).collect();
                            let next = ids.len() as u32;
                            *ids.entry(key).or_insert(next)
                        })
                        .collect();
                    CompiledTerm::Nodematch { class }
                }
            });
        }
        Ok(Self {
            spec: spec.clone(),
            template: graph.cleared(),
            terms,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn node_count(&self) -> usize {
        self.template.node_count()
    }

    /// An edgeless graph carrying the bound covariates.
    pub fn empty_graph(&self) -> NetworkGraph {
        self.template.clone()
    }

    /// `s(y)`, computed from scratch.
    pub fn stats(&self, g: &NetworkGraph) -> StatVector {
        let n = g.node_count();
        let mut out = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            out.push(match term {
                CompiledTerm::Edges => g.edge_count() as f64,
                CompiledTerm::Geometric {
                    shared_partners: true,
                    weight,
                    ..
                } => g
                    .edges()
                    .into_iter()
                    .map(|(i, j)| weight[g.shared_partners(i, j)])
                    .sum(),
                CompiledTerm::Geometric { weight, .. } => (0..n).map(|i| weight[g.degree(i)]).sum(),
                CompiledTerm::Nodematch { class } => g
                    .edges()
                    .into_iter()
                    .filter(|&(i, j)| class[i] == class[j])
                    .count() as f64,
            });
        }
        StatVector::from_raw(out)
    }

    /// Change statistics `s(y⁺_ij) − s(y⁻_ij)` written into `out`, using only
    /// the neighbourhoods of `i` and `j`.
    #[inline]
    pub fn change_stats_into(&self, g: &NetworkGraph, i: usize, j: usize, out: &mut [f64]) {
        let present = g.has_edge(i, j) as usize;
        for (term, o) in self.terms.iter().zip(out.iter_mut()) {
            *o = match term {
                CompiledTerm::Edges => 1.0,
                CompiledTerm::Geometric {
                    shared_partners: true,
                    weight,
                    rpow,
                } => {
                    let mut delta = weight[g.shared_partners(i, j)];
                    for k in g.common_neighbors(i, j) {
                        delta += rpow[g.shared_partners(i, k) - present]
                            + rpow[g.shared_partners(j, k) - present];
                    }
                    delta
                }
                CompiledTerm::Geometric { rpow, .. } => {
                    rpow[g.degree(i) - present] + rpow[g.degree(j) - present]
                }
                CompiledTerm::Nodematch { class } => (class[i] == class[j]) as u8 as f64,
            };
        }
    }

    pub fn change_stats(&self, g: &NetworkGraph, i: usize, j: usize) -> Result<StatVector> {
        if i == j {
            return Err(Error::Invalid(format!("dyad ({i}, {j}) is a self-loop")));
        }
        let mut out = vec![0.0; self.terms.len()];
        self.change_stats_into(g, i, j, &mut out);
        Ok(StatVector::from_raw(out))
    }
}

impl GrfModel for ErgmModel {
    type State = NetworkGraph;

    fn dim(&self) -> usize {
        self.terms.len()
    }

    fn stats(&self, y: &NetworkGraph) -> StatVector {
        ErgmModel::stats(self, y)
    }

    fn log_state_count(&self) -> f64 {
        self.template.dyad_count() as f64 * std::f64::consts::LN_2
    }

    fn for_each_state(&self, visit: &mut dyn FnMut(&NetworkGraph)) {
        let n = self.node_count();
        let dyads: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let mut g = self.empty_graph();
        // Gray code: one toggle per step.
        visit(&g);
        for step in 1u64..(1u64 << dyads.len()) {
            let (i, j) = dyads[step.trailing_zeros() as usize];
            g.toggle(i, j);
            visit(&g);
        }
    }
}

/// `s(y)` for `spec` evaluated on `g`.
pub fn network_stats(g: &NetworkGraph, spec: &ModelSpec) -> Result<StatVector> {
    Ok(ErgmModel::new(spec, g)?.stats(g))
}

/// Change statistics of dyad `(i, j)`, `i < j`.
pub fn change_stats(g: &NetworkGraph, spec: &ModelSpec, i: usize, j: usize) -> Result<StatVector> {
    if i >= j {
        return Err(Error::Invalid(format!("dyad must satisfy i < j, got ({i}, {j})")));
    }
    ErgmModel::new(spec, g)?.change_stats(g, i, j)
}
