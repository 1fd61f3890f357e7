use thiserror::Error;

/// Which linear solve of a two-stage step produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substep {
    Stage,
    Final,
}

impl std::fmt::Display for Substep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Substep::Stage => f.write_str("stage"),
            Substep::Final => f.write_str("final"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("sign pattern violated at ({row}, {col}): {value}")]
    SignPatternViolation { row: usize, col: usize, value: f64 },

    #[error("column {col} sums to {sum}, expected zero")]
    NotConservative { col: usize, sum: f64 },

    #[error("state component {index} must be finite, got {value}")]
    NonFinite { index: usize, value: f64 },

    #[error("state component {index} must be strictly positive, got {value}")]
    NonPositiveInput { index: usize, value: f64 },

    #[error("{substep} solve produced non-positive component {index}: {value}")]
    NumericalBreakdown {
        substep: Substep,
        index: usize,
        value: f64,
    },

    #[error("{substep} linear system is singular")]
    SingularSystem { substep: Substep },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("production term p[{row}][{col}] = {value} is invalid")]
    InvalidProduction { row: usize, col: usize, value: f64 },

    #[error("production evaluation failed: {0}")]
    ProductionEvaluation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("steady state lies on the boundary of the positive orthant (a = {a}, b = {b})")]
    DegenerateSteadyState { a: f64, b: f64 },

    #[error("not a steady state: |A y| = {residual}")]
    NotASteadyState { residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no stability boundary below xi = {xi} for alpha = {alpha}")]
    NoBoundary { xi: f64, alpha: f64 },

    #[error("no sign change found for time steps up to {upper}")]
    BracketFailure { upper: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
