use thiserror::Error;

/// Errors raised by the solvers and by spec validation.
///
/// Numeric payloads are stored as `f64` whatever the scalar type of the
/// computation, so the error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Argument outside the domain of an auxiliary inverse.
    #[error("{what}: argument {value} outside the admissible domain")]
    Domain { what: &'static str, value: f64 },

    /// The law is quadratic, so its auxiliary parameter is fixed rather than
    /// obtained by inversion.
    #[error("{0} is degenerate under auxiliary inversion (parameter is pinned)")]
    DegenerateLaw(&'static str),

    /// The auxiliary potential equation has no positive root.
    #[error("no binding: {0}")]
    NoBinding(String),

    /// No bracketing interval was found for the equation system.
    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        residuals: Vec<f64>,
    },

    #[error("no bound state: {0}")]
    NoBoundState(String),
}

pub type Result<V, E = Error> = std::result::Result<V, E>;
