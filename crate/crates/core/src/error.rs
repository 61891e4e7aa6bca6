use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every layer of the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the set where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Gamma-type function evaluated at a nonpositive integer.
    #[error("pole of the gamma function at x = {0}")]
    Pole(f64),

    /// A series did not reach its termination criterion before the term cap.
    #[error("series not converged after {terms} terms (partial sum {partial:e})")]
    SeriesCap { terms: usize, partial: f64 },

    /// Adaptive quadrature ran out of panels before reaching the tolerance.
    #[error("quadrature reached error {achieved:e} (requested {requested:e}), estimate {estimate:e}")]
    Accuracy {
        estimate: f64,
        achieved: f64,
        requested: f64,
    },

    /// Vector or matrix sizes do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// An iterative solver exceeded its iteration budget.
    #[error("{solver} did not converge in {iterations} iterations (last measure {last:e})")]
    Convergence {
        solver: &'static str,
        iterations: usize,
        last: f64,
    },

    /// A floating point computation produced an impossible state.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Inputs are individually valid but cannot be combined into an experiment.
    #[error("configuration error: {0}")]
    Config(String),
}
