use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("state space has {required} configurations, above the enumeration cap of {cap}")]
    EnumerationCap { required: f64, cap: u64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("model spec error at column {column}: {message}")]
    ModelSpec { column: usize, message: String },

    #[error("covariate `{0}` not found")]
    MissingCovariate(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("no convergence after {iterations} iterations (gradient norm {grad_norm:.3e}, last iterate {last:?})")]
    NonConvergence {
        iterations: usize,
        grad_norm: f64,
        last: Vec<f64>,
    },

    #[error("separation: term {term} perfectly predicts the observed outcomes, the maximum is at infinity")]
    Separation { term: usize },

    #[error("covariance of simulated statistics is singular ({0}); increase the sample size or drop a degenerate term")]
    SingularCovariance(String),

    #[error("matrix is not negative definite (eigenvalue {eigenvalue:.3e})")]
    NotNegativeDefinite { eigenvalue: f64 },

    #[error("matrix is singular or not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("importance weights degenerate {attempts} times in a row (ESS {ess:.1} of {draws}); increase the number of simulated draws")]
    DegenerateWeights {
        attempts: usize,
        ess: f64,
        draws: usize,
    },

    #[error("lattice lag dimension {lag} with {states} states needs {required} messages per site, over the budget of {budget}")]
    RecursionBudget {
        lag: usize,
        states: usize,
        required: f64,
        budget: usize,
    },

    #[error("numerical underflow: {0}")]
    Underflow(String),

    #[error("{phase} phase failed: {source}")]
    Phase {
        phase: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("input data differ: {0} vs {1}")]
    DataMismatch(String, String),

    #[error("unsupported schema version {found} (supported: {supported})")]
    Schema { found: u32, supported: u32 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn in_phase(self, phase: &'static str) -> Self {
        Error::Phase {
            phase,
            source: Box::new(self),
        }
    }

    /// Process exit code category for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Phase { source, .. } => source.exit_code(),
            Error::Config(_) | Error::ModelSpec { .. } => 2,
            Error::Parse { .. }
            | Error::MissingCovariate(_)
            | Error::DataMismatch(..)
            | Error::Schema { .. }
            | Error::Json(_)
            | Error::Invalid(_)
            | Error::DimensionMismatch { .. } => 3,
            Error::Io(_) => 5,
            _ => 4,
        }
    }
}
