use thiserror::Error;

/// Errors raised by the geometry, dynamics and oracle layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("expected an even dimension, got {0}")]
    OddDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("degenerate frame: |det| = {det:e} is at or below {threshold:e}")]
    DegenerateFrame { det: f64, threshold: f64 },

    #[error("frame is ill-conditioned (condition number {cond:e})")]
    IllConditioned { cond: f64 },

    #[error("{what}: membership residual {residual:e} exceeds tolerance {tol:e}")]
    Membership {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("{what} is not symmetric (residual {residual:e})")]
    NotSymmetric { what: &'static str, residual: f64 },

    #[error("{what} is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite {
        what: &'static str,
        min_eigenvalue: f64,
    },

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("branch tracker jump of {delta} rad violates the |Δθ| < π/2 step contract")]
    BranchJump { delta: f64 },

    #[error("branch tracker is out of sync with det Q (mismatch {mismatch:e})")]
    BranchMismatch { mismatch: f64 },

    #[error("implicit midpoint Newton iteration failed to converge at step {step}")]
    NewtonFailure { step: usize },

    #[error("non-finite state detected at step {step}")]
    NonFiniteState { step: usize },

    #[error("wave function boundary magnitude {magnitude:e} exceeds {tol:e} at step {step}")]
    BoundaryMass {
        step: usize,
        magnitude: f64,
        tol: f64,
    },

    #[error("step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// Failures caused by the numerics of a run rather than by its inputs.
    pub fn is_numerical(&self) -> bool {
        if let Error::AtStep { source, .. } = self {
            return source.is_numerical() || matches!(**source, Error::NonFinite);
        }
        matches!(
            self,
            Error::NewtonFailure { .. }
                | Error::NonFiniteState { .. }
                | Error::BoundaryMass { .. }
                | Error::BranchJump { .. }
                | Error::Singular(_)
                | Error::IllConditioned { .. }
                | Error::NotPositiveDefinite { .. }
        )
    }

    /// Step index for failures raised during time stepping.
    pub fn step(&self) -> Option<usize> {
        match self {
            Error::AtStep { step, .. }
            | Error::NewtonFailure { step }
            | Error::NonFiniteState { step }
            | Error::BoundaryMass { step, .. } => Some(*step),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
