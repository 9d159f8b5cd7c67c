use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected simple graph on nodes `0..n`, with optional categorical node
/// covariates. Adjacency is stored as one bitset row per node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkGraph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    edge_count: usize,
    covariates: BTreeMap<String, Vec<String>>,
}

impl NetworkGraph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self {
            n,
            words,
            rows: vec![0; n * words],
            edge_count: 0,
            covariates: BTreeMap::new(),
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Invalid(format!("edge ({i}, {j}) outside 0..{n}")));
            }
            if i == j {
                return Err(Error::Invalid(format!("self-loop on node {i}")));
            }
            g.add_edge(i, j);
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Number of dyads `n(n-1)/2`.
    pub fn dyad_count(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    fn set_bit(&mut self, i: usize, j: usize, on: bool) {
        let w = &mut self.rows[i * self.words + j / 64];
        if on {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    /// Adds edge `{i, j}`; returns false if it was already present.
    pub fn add_edge(&mut self, i: usize, j: usize) -> bool {
        debug_assert!(i != j);
        if self.has_edge(i, j) {
            return false;
        }
        self.set_bit(i, j, true);
        self.set_bit(j, i, true);
        self.edge_count += 1;
        true
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) -> bool {
        if !self.has_edge(i, j) {
            return false;
        }
        self.set_bit(i, j, false);
        self.set_bit(j, i, false);
        self.edge_count -= 1;
        true
    }

    pub fn toggle(&mut self, i: usize, j: usize) {
        if !self.remove_edge(i, j) {
            self.add_edge(i, j);
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `|N(i) ∩ N(j)|`.
    #[inline]
    pub fn shared_partners(&self, i: usize, j: usize) -> usize {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        bits(self.row(i))
    }

    /// Common neighbours of `i` and `j`.
    pub fn common_neighbors(&self, i: usize, j: usize) -> impl Iterator<Item = usize> + '_ {
        let (ri, rj) = (self.row(i), self.row(j));
        (0..self.words).flat_map(move |w| {
            let mut word = ri[w] & rj[w];
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + b)
            })
        })
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for i in 0..self.n {
            out.extend(self.neighbors(i).filter(|&j| j > i).map(|j| (i, j)));
        }
        out
    }

    pub fn covariates(&self) -> &BTreeMap<String, Vec<String>> {
        &self.covariates
    }

    pub fn covariate(&self, name: &str) -> Result<&[String]> {
        self.covariates
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingCovariate(name.to_string()))
    }

    pub fn set_covariate(&mut self, name: impl Into<String>, labels: Vec<String>) -> Result<()> {
        if labels.len() != self.n {
            return Err(Error::Invalid(format!(
                "covariate has {} labels for {} nodes",
                labels.len(),
                self.n
            )));
        }
        self.covariates.insert(name.into(), labels);
        Ok(())
    }

    /// Same nodes and covariates, no edges.
    pub fn cleared(&self) -> Self {
        let mut g = Self::empty(self.n);
        g.covariates = self.covariates.clone();
        g
    }

    /// Relabels nodes: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut g = Self::empty(self.n);
        for (i, j) in self.edges() {
            g.add_edge(perm[i], perm[j]);
        }
        for (name, labels) in &self.covariates {
            let mut out = vec![String::new(); self.n];
            for (i, l) in labels.iter().enumerate() {
                out[perm[i]] = l.clone();
            }
            g.covariates.insert(name.clone(), out);
        }
        g
    }
}

fn bits(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(w, &word)| {
        let mut word = word;
        std::iter::from_fn(move || {
            if word == 0 {
                return None;
            }
            let b = word.trailing_zeros() as usize;
            word &= word - 1;
            Some(w * 64 + b)
        })
    })
}
