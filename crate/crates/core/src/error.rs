use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A required constant or parameter is missing or malformed.
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A schedule does not satisfy the hypotheses of its step-size rule.
    #[error("schedule hypothesis violated: {0}")]
    ScheduleViolation(String),

    /// The inner prox solver ran out of iterations.
    #[error("inner solver did not converge after {iterations} iterations (best certified distance {best_residual:e})")]
    ConvergenceFailure { iterations: usize, best_residual: f64 },

    #[error("internal consistency error: {0}")]
    InternalConsistency(String),

    #[error("diagnostics failed: {0}")]
    DiagnosticsFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
