use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index set too large: {0}")]
    Capacity(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: coordinate {coord} has value {value} ({reason})")]
    Domain {
        coord: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("rank-deficient matrix: column {column} is (numerically) dependent")]
    RankDeficient { column: usize },

    #[error("matrix is not positive definite (pivot {pivot}, value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("coefficient {value:e} at x = {x} is below the ellipticity floor")]
    CoefficientBelowFloor { x: f64, value: f64 },

    #[error("sample rejected: coefficient not elliptic at y = {y:?}")]
    SampleRejected { y: Vec<f64> },

    #[error("rejection cap hit: {rejected} of {drawn} draws rejected")]
    RejectionCap { rejected: usize, drawn: usize },

    #[error("quantity of interest diverges: {0}")]
    DivergentQoi(String),

    #[error("reference not converged: levels {coarse} and {fine} differ by {rel_diff:e} (relative)")]
    ReferenceNotConverged {
        coarse: f64,
        fine: f64,
        rel_diff: f64,
    },

    #[error("fit failed ({context}): {source}")]
    Fit {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("internal error: {0}")]
    Internal(String),
}
