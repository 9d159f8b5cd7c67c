use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::{EvidenceEstimate, Method};
use crate::numeric::{mean, std_dev};
use crate::prior::GaussianPrior;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Output of the `evidence` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub schema_version: u32,
    pub model: String,
    pub data_hash: String,
    /// `false` when the estimates use the raw pseudolikelihood.
    pub adjusted: bool,
    pub prior: GaussianPrior,
    pub estimates: Vec<EvidenceEstimate>,
}

impl EvidenceReport {
    pub fn estimate(&self, method: Method) -> Option<&EvidenceEstimate> {
        self.estimates.iter().find(|e| e.method == method)
    }

    pub fn table(&self) -> String {
        let mut out = format!(
            "model: {}  ({})\n{:<16} {:>14} {:>10} {:>10}\n",
            self.model,
            if self.adjusted { "adjusted" } else { "unadjusted" },
            "method",
            "log evidence",
            "sd",
            "seconds"
        );
        for e in &self.estimates {
            let sd = e.replicate_sd.map_or("-".to_string(), |s| format!("{s:.4}"));
            out.push_str(&format!(
                "{:<16} {:>14.4} {:>10} {:>10.2}\n",
                e.method.name(),
                e.log_evidence,
                sd,
                e.seconds
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesFactorRow {
    pub method: Method,
    pub log_bf: f64,
    pub log_bf_sd: Option<f64>,
    /// Mean and SD of per-replicate Bayes factors.
    pub bf: f64,
    pub bf_sd: Option<f64>,
}

/// Output of the `bf` command: `BF = π(y|a) / π(y|b)` per shared method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesFactorReport {
    pub schema_version: u32,
    pub data_hash: String,
    pub model_a: String,
    pub model_b: String,
    pub rows: Vec<BayesFactorRow>,
}

impl BayesFactorReport {
    pub fn compare(a: &EvidenceReport, b: &EvidenceReport) -> Result<Self> {
        if a.data_hash != b.data_hash {
            return Err(Error::DataMismatch(a.data_hash.clone(), b.data_hash.clone()));
        }
        let mut rows = Vec::new();
        for ea in &a.estimates {
            let Some(eb) = b.estimate(ea.method) else { continue };
            let n = ea.replicates.len().min(eb.replicates.len());
            let log_bf: Vec<f64> = (0..n).map(|r| ea.replicates[r] - eb.replicates[r]).collect();
            let bf: Vec<f64> = log_bf.iter().map(|v| v.exp()).collect();
            rows.push(BayesFactorRow {
                method: ea.method,
                log_bf: mean(&log_bf),
                log_bf_sd: (n > 1).then(|| std_dev(&log_bf)),
                bf: mean(&bf),
                bf_sd: (n > 1).then(|| std_dev(&bf)),
            });
        }
        if rows.is_empty() {
            return Err(Error::Invalid("the two reports share no estimation method".into()));
        }
        Ok(Self {
            schema_version: REPORT_SCHEMA_VERSION,
            data_hash: a.data_hash.clone(),
            model_a: a.model.clone(),
            model_b: b.model.clone(),
            rows,
        })
    }

    pub fn table(&self) -> String {
        let mut out = format!(
            "BF = evidence({}) / evidence({})\n{:<16} {:>10} {:>10} {:>12} {:>10}\n",
            self.model_a, self.model_b, "method", "log BF", "sd", "BF", "sd"
        );
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |s| format!("{s:.4}"));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<16} {:>10.4} {:>10} {:>12.4} {:>10}\n",
                r.method.name(),
                r.log_bf,
                fmt(r.log_bf_sd),
                r.bf,
                fmt(r.bf_sd)
            ));
        }
        out
    }
}

/// Writes pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_report<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let found = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found != REPORT_SCHEMA_VERSION {
        return Err(Error::Schema {
            found,
            supported: REPORT_SCHEMA_VERSION,
        });
    }
    Ok(serde_json::from_value(value)?)
}
