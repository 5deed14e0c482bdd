use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("linear solve failed: {0}")]
    SingularSystem(String),

    #[error("Newton iteration did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NewtonDivergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("time step {step} (t = {time}) failed: {source}")]
    StepFailed {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed file {path}: {reason}")]
    Format { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::SingularSystem(_) | Error::NewtonDivergence { .. } => true,
            Error::StepFailed { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
