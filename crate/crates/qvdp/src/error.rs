//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by construction, solvers, and observable extraction.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Fock index {index} out of range for cutoff {cutoff}")]
    IndexOutOfRange { index: usize, cutoff: usize },

    #[error("state fails physicality check: {0}")]
    UnphysicalState(String),

    #[error("steady state is degenerate (multiple null vectors above tolerance)")]
    DegenerateSteadyState,

    #[error("solver failed to converge: {context} (residual {residual:.3e})")]
    SolverFailure { context: String, residual: f64 },

    #[error("Fock cutoff ceiling {ceiling} reached without convergence (tail {tail:.3e})")]
    CutoffCeiling { ceiling: usize, tail: f64 },

    #[error("integrator step size underflow at t = {t:.6e} (stiffness)")]
    Stiffness { t: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("correlation not decayed at tau_max (relative residual {residual:.3e})")]
    NotDecayed { residual: f64 },

    #[error("spectrum peak at grid edge; frequency window too narrow")]
    GridTooNarrow,

    #[error("internal cross-validation failed: {0}")]
    CrossValidation(String),

    #[error("accuracy check failed: {0}")]
    Accuracy(String),

    #[error("observable undefined: {0}")]
    UndefinedObservable(String),

    #[error("phase singularity: trajectory reached R <= {r_min:.3e} with F != 0")]
    PhaseSingularity { r_min: f64 },

    #[error("no phase-locked solution: eta = {eta:.6e} < |Delta|/2 = {threshold:.6e}")]
    NoLock { eta: f64, threshold: f64 },

    #[error("fixed-point stability unresolved: |Re lambda| = {re:.3e} below resolution")]
    MarginalStability { re: f64 },
}

impl Error {
    /// Short stable code, used by the sweep engine to record per-point failures.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "E_PARAMS",
            Error::DimensionMismatch { .. } => "E_DIM",
            Error::IndexOutOfRange { .. } => "E_RANGE",
            Error::UnphysicalState(_) => "E_UNPHYSICAL",
            Error::DegenerateSteadyState => "E_DEGENERATE",
            Error::SolverFailure { .. } => "E_SOLVER",
            Error::CutoffCeiling { .. } => "E_CUTOFF",
            Error::Stiffness { .. } => "E_STIFF",
            Error::Precondition(_) => "E_PRECONDITION",
            Error::NotDecayed { .. } => "E_NOT_DECAYED",
            Error::GridTooNarrow => "E_GRID_NARROW",
            Error::CrossValidation(_) => "E_CROSSCHECK",
            Error::Accuracy(_) => "E_ACCURACY",
            Error::UndefinedObservable(_) => "E_UNDEFINED",
            Error::PhaseSingularity { .. } => "E_SINGULARITY",
            Error::NoLock { .. } => "E_NO_LOCK",
            Error::MarginalStability { .. } => "E_MARGINAL",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
