use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a ladder is generated: `t_i = (i / rungs)^power`, `i = 0..=rungs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec {
    pub rungs: usize,
    pub power: f64,
}

/// Temperatures `0 = t_0 < t_1 < … < t_L = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureLadder {
    points: Vec<f64>,
}

impl TemperatureLadder {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Invalid("a ladder needs at least two temperatures".into()));
        }
        if points[0] != 0.0 || *points.last().unwrap() != 1.0 {
            return Err(Error::Invalid("ladder must start at exactly 0 and end at exactly 1".into()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("ladder temperatures must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    pub fn from_spec(spec: LadderSpec) -> Result<Self> {
        if spec.rungs == 0 || !(spec.power > 0.0) {
            return Err(Error::Invalid("ladder needs rungs >= 1 and power > 0".into()));
        }
        let l = spec.rungs as f64;
        Self::new(
            (0..=spec.rungs)
                .map(|i| (i as f64 / l).powf(spec.power))
                .collect(),
        )
    }

    /// `rungs` equal intervals on `[0, 1]`.
    pub fn uniform(rungs: usize) -> Result<Self> {
        Self::from_spec(LadderSpec { rungs, power: 1.0 })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of intervals `L`.
    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }
}
