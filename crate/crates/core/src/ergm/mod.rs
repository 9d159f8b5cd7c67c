//! Exponential random graph models on undirected networks.

mod graph;
mod io;
mod stats;
mod terms;
mod tnt;

pub use graph::NetworkGraph;
pub use io::{load_covariates, load_network, parse_edge_list};
pub use stats::{change_stats, network_stats, ErgmModel};
pub use terms::{ModelSpec, ModelTerm};
pub use tnt::{simulate_networks, ErgmSampler, TntChain};
