use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GrfModel, StatVector};
use crate::seeds::Rng;

/// An `height × width` grid of states `1..=S` with first-order (4-neighbour)
/// structure. Cells are stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    height: usize,
    width: usize,
    states: u8,
    cells: Vec<u8>,
}

impl Lattice {
    pub fn new(height: usize, width: usize, states: u8, cells: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Invalid("lattice dimensions must be at least 1".into()));
        }
        if states < 2 {
            return Err(Error::Invalid("a Potts lattice needs at least 2 states".into()));
        }
        if cells.len() != height * width {
            return Err(Error::Invalid(format!(
                "{} cells for a {height}x{width} lattice",
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|&&c| c == 0 || c > states) {
            return Err(Error::Invalid(format!("cell value {bad} outside 1..={states}")));
        }
        Ok(Self {
            height,
            width,
            states,
            cells,
        })
    }

    pub fn uniform(height: usize, width: usize, states: u8, value: u8) -> Result<Self> {
        Self::new(height, width, states, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn states(&self) -> u8 {
        self.states
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        debug_assert!(value >= 1 && value <= self.states);
        self.cells[row * self.width + col] = value;
    }

    /// First-order neighbours of a site (row-major index).
    pub fn neighbors(&self, site: usize) -> impl Iterator<Item = usize> {
        let (r, c, h, w) = (site / self.width, site % self.width, self.height, self.width);
        [
            (r > 0).then(|| site - w),
            (r + 1 < h).then(|| site + w),
            (c > 0).then(|| site - 1),
            (c + 1 < w).then(|| site + 1),
        ]
        .into_iter()
        .flatten()
    }

    /// Number of neighbours of `site` in each state; index `s - 1`.
    pub fn neighbor_counts(&self, site: usize) -> Vec<u8> {
        let mut counts = vec![0u8; self.states as usize];
        for nb in self.neighbors(site) {
            counts[self.cells[nb] as usize - 1] += 1;
        }
        counts
    }

    /// Swaps the two axes.
    pub fn transposed(&self) -> Lattice {
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in 0..self.width {
            for r in 0..self.height {
                cells.push(self.get(r, c));
            }
        }
        Lattice {
            height: self.width,
            width: self.height,
            states: self.states,
            cells,
        }
    }

    /// Applies a permutation of the state labels (`perm[s-1]` is the new label of `s`).
    pub fn relabeled(&self, perm: &[u8]) -> Lattice {
        let mut out = self.clone();
        for c in &mut out.cells {
            *c = perm[*c as usize - 1];
        }
        out
    }

    /// Comma-separated rows, one lattice row per line.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for r in 0..self.height {
            for c in 0..self.width {
                if c > 0 {
                    s.push(',');
                }
                write!(s, "{}", self.get(r, c)).unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn parse_csv(text: &str, states: u8, path: &Path) -> Result<Lattice> {
        let mut rows: Vec<Vec<u8>> = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<u8>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: k + 1,
                    message: e.to_string(),
                })?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: k + 1,
                        message: format!("row has {} cells, expected {}", row.len(), first.len()),
                    });
                }
            }
            rows.push(row);
        }
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        Lattice::new(height, width, states, rows.concat()).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path, states: u8) -> Result<Lattice> {
        Self::parse_csv(&fs::read_to_string(path)?, states, path)
    }
}

/// `s(y)`: the number of first-order neighbour pairs in equal states.
pub fn potts_stat(l: &Lattice) -> f64 {
    let mut count = 0usize;
    for r in 0..l.height {
        for c in 0..l.width {
            let v = l.get(r, c);
            if c + 1 < l.width && l.get(r, c + 1) == v {
                count += 1;
            }
            if r + 1 < l.height && l.get(r + 1, c) == v {
                count += 1;
            }
        }
    }
    count as f64
}

/// `p(y_i = s | y_{-i}, θ) ∝ exp{θ · #(neighbours in state s)}`.
pub fn full_conditional(l: &Lattice, site: usize, theta: f64) -> Vec<f64> {
    let counts = l.neighbor_counts(site);
    let max = *counts.iter().max().unwrap() as f64;
    let w: Vec<f64> = counts
        .iter()
        .map(|&k| (theta * (k as f64 - max)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// One systematic-scan Gibbs sweep over every site.
pub fn gibbs_sweep(l: &mut Lattice, theta: f64, rng: &mut Rng) {
    for site in 0..l.len() {
        let p = full_conditional(l, site, theta);
        let mut u: f64 = rng.gen();
        let mut pick = p.len() - 1;
        for (s, ps) in p.iter().enumerate() {
            if u < *ps {
                pick = s;
                break;
            }
            u -= ps;
        }
        l.cells[site] = pick as u8 + 1;
    }
}

/// Potts model on a fixed grid, as a [`GrfModel`] with `d = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PottsModel {
    pub height: usize,
    pub width: usize,
    pub states: u8,
}

impl PottsModel {
    pub fn for_lattice(l: &Lattice) -> Self {
        Self {
            height: l.height,
            width: l.width,
            states: l.states,
        }
    }

    pub fn sites(&self) -> usize {
        self.height * self.width
    }
}

impl GrfModel for PottsModel {
    type State = Lattice;

    fn dim(&self) -> usize {
        1
    }

    fn stats(&self, y: &Lattice) -> StatVector {
        StatVector::from_raw(vec![potts_stat(y)])
    }

    fn log_state_count(&self) -> f64 {
        self.sites() as f64 * (self.states as f64).ln()
    }

    fn for_each_state(&self, visit: &mut dyn FnMut(&Lattice)) {
        let mut l = Lattice::uniform(self.height, self.width, self.states, 1).unwrap();
        loop {
            visit(&l);
            // odometer increment
            let mut k = 0;
            loop {
                if k == l.cells.len() {
                    return;
                }
                if l.cells[k] < self.states {
                    l.cells[k] += 1;
                    break;
                }
                l.cells[k] = 1;
                k += 1;
            }
        }
    }
}
