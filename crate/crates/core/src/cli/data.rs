use std::path::Path;

use crate::calibration::data_hash;
use crate::ergm::{load_network, network_stats, ErgmModel, ErgmSampler, ModelSpec, NetworkGraph};
use crate::error::{Error, Result};
use crate::model::{LikelihoodSampler, StatVector};
use crate::potts::{potts_stat, Lattice, PottsSampler};
use crate::pseudolikelihood::PlSurface;

use super::config::AdjustConfig;

/// An observed dataset together with the model fitted to it.
#[derive(Debug, Clone)]
pub enum Dataset {
    Network { graph: NetworkGraph, spec: ModelSpec },
    Lattice(Lattice),
}

impl Dataset {
    pub fn network(edges: &Path, covariates: Option<&Path>, spec: &str) -> Result<Self> {
        let spec: ModelSpec = spec.parse()?;
        let graph = load_network(edges, covariates).map_err(|e| e.in_phase("ingestion"))?;
        // surfaces missing covariates before any sampling starts
        ErgmModel::new(&spec, &graph).map_err(|e| e.in_phase("ingestion"))?;
        Ok(Dataset::Network { graph, spec })
    }

    pub fn lattice(path: &Path, states: u8) -> Result<Self> {
        Ok(Dataset::Lattice(Lattice::load(path, states).map_err(|e| e.in_phase("ingestion"))?))
    }

    pub fn model_label(&self) -> String {
        match self {
            Dataset::Network { spec, .. } => spec.to_string(),
            Dataset::Lattice(l) => format!("potts(states={})", l.states()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Dataset::Network { spec, .. } => spec.dim(),
            Dataset::Lattice(_) => 1,
        }
    }

    /// Hash of a canonical rendering of the data (not of the model), so
    /// artifacts for different models of the same data compare equal.
    pub fn hash(&self) -> String {
        match self {
            Dataset::Network { graph, .. } => {
                let mut text = format!("network n={}\n", graph.node_count());
                for (i, j) in graph.edges() {
                    text.push_str(&format!("{i} {j}\n"));
                }
                for (name, values) in graph.covariates() {
                    text.push_str(&format!("{name}:{}\n", values.join(",")));
                }
                data_hash(text.as_bytes())
            }
            Dataset::Lattice(l) => data_hash(format!("lattice states={}\n{}", l.states(), l.to_csv()).as_bytes()),
        }
    }

    pub fn observed(&self) -> Result<StatVector> {
        match self {
            Dataset::Network { graph, spec } => network_stats(graph, spec),
            Dataset::Lattice(l) => StatVector::new(vec![potts_stat(l)]),
        }
    }

    pub fn surface(&self) -> Result<PlSurface> {
        match self {
            Dataset::Network { graph, spec } => PlSurface::ergm(&ErgmModel::new(spec, graph)?, graph),
            Dataset::Lattice(l) => PlSurface::potts(l),
        }
    }

    pub fn sampler(&self, cfg: &AdjustConfig) -> Result<Box<dyn LikelihoodSampler>> {
        match self {
            Dataset::Network { graph, spec } => {
                if !(cfg.p_edge > 0.0 && cfg.p_edge < 1.0) || cfg.thin == 0 {
                    return Err(Error::Config("need 0 < p_edge < 1 and thin >= 1".into()));
                }
                let mut s = ErgmSampler::new(ErgmModel::new(spec, graph)?, graph.clone());
                s.burn_in = cfg.burn_in;
                s.thin = cfg.thin;
                s.p_edge = cfg.p_edge;
                Ok(Box::new(s))
            }
            Dataset::Lattice(l) => Ok(Box::new(PottsSampler::new(l.height(), l.width(), l.states()))),
        }
    }
}
