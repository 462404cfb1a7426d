//! Error types shared across the identification pipeline.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("degenerate nodes: min gap {min_gap:.3e} below threshold {threshold:.3e}")]
    DegenerateNodes { min_gap: f64, threshold: f64 },

    #[error("degree deficient: leading coefficient {leading:.3e} below threshold {threshold:.3e}")]
    DegreeDeficient { leading: f64, threshold: f64 },

    /// An iterative solver hit its iteration budget. `best` carries the best
    /// iterate reached: eigenvector coordinates for the eigensolver,
    /// interleaved re/im root coordinates for the root finder.
    #[error("{what} did not converge after {iterations} iterations (best residual {residual:.3e})")]
    ConvergenceFailure {
        what: &'static str,
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("required sample size exceeds the cap of {cap}")]
    InfeasibleSampleSize { cap: u64 },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips `Stage` wrappers down to the underlying failure.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root_cause(),
            other => other,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
