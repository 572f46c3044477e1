use thiserror::Error;

/// Errors surfaced by the estimators and the numerical kernels.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A Cholesky pivot fell below the positive-definiteness threshold,
    /// signalling a degenerate covariance.
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The iterative eigensolver exceeded its internal sweep cap.
    #[error("eigensolver did not converge within {max_sweeps} sweeps")]
    ConvergenceFailure { max_sweeps: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A sample row has (near-)zero Euclidean norm and cannot be projected
    /// onto the unit sphere.
    #[error("sample row {row} has near-zero norm")]
    ZeroSample { row: usize },

    #[error("matrix trace {trace} is not normalized to the dimension {dim}")]
    NotTraceNormalized { trace: f64, dim: usize },

    /// n < p: the non-regularized estimator does not exist.
    #[error("n < p: estimator needs at least {needed} samples, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },

    /// ROC evaluation needs at least one positive and one negative label.
    #[error("degenerate labels: need both classes present")]
    DegenerateLabels,

    #[error("degenerate data: {0}")]
    DegenerateData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
