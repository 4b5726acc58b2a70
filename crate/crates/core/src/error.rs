use thiserror::Error;

/// Errors raised by mesh construction, finite element assembly and the
/// stability calculators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0} (supported: 1..=8)")]
    UnsupportedDimension(usize),

    #[error("simplex {0} is not active")]
    InactiveSimplex(usize),

    #[error("closure did not terminate within {cap} sweeps; the tag configuration is invalid")]
    ClosureNonTermination { cap: usize },

    #[error(
        "limited grading violated: simplices {a} (level {level_a}) and {b} (level {level_b}) touch \
         but differ by more than {alpha} levels"
    )]
    GradingPrecondition {
        a: usize,
        b: usize,
        level_a: u32,
        level_b: u32,
        alpha: u32,
    },

    #[error("dyadic coordinate precision exhausted (denominator exponent above {0})")]
    CoordinateOverflow(u32),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("simplex {0} is degenerate (zero volume)")]
    DegenerateSimplex(usize),

    #[error("value at index {index} is not positive ({value})")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("polynomial degree {degree} exceeds the cap {cap}")]
    DegreeOverflow { degree: u32, cap: u32 },

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverNonConvergence { iterations: usize, residual: f64 },

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("eigen solver failure: {0}")]
    EigenFailure(String),

    #[error("element set is empty")]
    EmptySet,

    #[error("bilinear forms disagree for pair ({left}, {right}): {lhs} != {rhs}")]
    FormMismatch {
        left: String,
        right: String,
        lhs: String,
        rhs: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
