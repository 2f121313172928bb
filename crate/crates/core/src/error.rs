use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GapError {
    /// An argument lies outside the domain of a curvature kernel (e.g. at or beyond
    /// the zero of `cs_K` when `K > 0`).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid user-supplied parameters.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A precondition of a check does not hold (hypothesis of the underlying statement).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative method failed to converge.
    #[error("no convergence in {method}: {detail}")]
    Convergence { method: &'static str, detail: String },

    /// The adaptive integrator could not make progress.
    #[error("step size underflow at s = {at:e} (target {target:e})")]
    StepUnderflow { at: f64, target: f64 },

    /// The two eigenvalue methods disagree.
    #[error("methods disagree for eigenvalue {index}: shooting {shooting:.12e}, tridiagonal {tridiag:.12e}")]
    Inconsistent {
        index: usize,
        shooting: f64,
        tridiag: f64,
    },

    /// A numerically checked property is violated by a margin larger than noise.
    #[error("property violated: {0}")]
    PropertyViolation(String),

    /// Accumulated rounding pushed a quantity outside its admissible range.
    #[error("numerical drift: {0}")]
    NumericalDrift(String),
}

pub type Result<T> = std::result::Result<T, GapError>;
