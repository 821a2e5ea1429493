use thiserror::Error;

/// Errors raised anywhere in the laboratory.
///
/// Each variant maps onto one process exit code of the `blowup-lab` binary
/// (see [`LabError::exit_code`]).
#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("evolution diverged at step {step} (tau = {tau:.6})")]
    Divergence { step: usize, tau: f64 },

    #[error("blowup-time extraction failed: {reason}; D(T) trace: {trace:?}")]
    Extraction {
        reason: String,
        trace: Vec<(f64, f64)>,
    },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Domain(_) => 2,
            LabError::Divergence { .. } => 3,
            LabError::Extraction { .. } => 4,
            LabError::Contract(_) | LabError::Solver(_) => 5,
            LabError::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
