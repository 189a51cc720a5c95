//! Error type shared across the crate.

/// Errors produced by solvers, special functions and validators.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested accuracy cannot be guaranteed for these inputs.
    #[error("accuracy not guaranteed: {0}")]
    Accuracy(String),

    /// A fractional-derivative evaluation needs at least one prior step.
    #[error("insufficient history: need values at two or more time levels")]
    InsufficientHistory,

    /// Fixed-point iteration ran out of iterations.
    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// A time step failed; carries the step index.
    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    /// Order estimation hit a zero or negative difference norm.
    #[error("degenerate order estimate: {0}")]
    DegenerateEstimate(String),

    /// Invariant violation that indicates a bug rather than bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
