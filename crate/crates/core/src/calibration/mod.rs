//! Mode, curvature and magnitude adjustment of a pseudolikelihood.

mod adjusted;
mod artifact;
mod curvature;
mod ladder;
mod mcmle;
mod moments;
mod path;

pub use adjusted::{adjusted_log_likelihood, AdjustedLikelihood, LogLikelihood};
pub use artifact::{
    build_adjusted, data_hash, AdjustmentArtifact, AdjustmentInput, AdjustmentSettings, McmleDiagnostics,
    PhaseTimings, ARTIFACT_SCHEMA_VERSION,
};
pub use curvature::{curvature_matrix, upper_cholesky};
pub use ladder::{LadderSpec, TemperatureLadder};
pub use mcmle::{mcmle, McmleResult, McmleSettings};
pub use moments::{estimate_moments, sample_moments};
pub use path::estimate_log_partition_path;
