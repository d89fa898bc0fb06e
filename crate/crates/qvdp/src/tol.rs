//! Centralized numeric tolerances.
//!
//! All physicality checks and solver certificates use these constants so that
//! the thresholds are defined in one place rather than scattered as magic
//! numbers.  Rates and frequencies are expressed in units of the linear pump
//! rate `gamma1` throughout the crate; the tolerances below assume that scale.

/// Max-norm tolerance for Hermiticity checks (`rho - rho^dag`, `H - H^dag`).
pub const HERMITICITY: f64 = 1e-12;

/// Absolute tolerance on `|Tr(rho) - 1|`.
pub const TRACE: f64 = 1e-10;

/// Lower bound for the smallest eigenvalue of a density matrix.
pub const MIN_EIGENVALUE: f64 = -1e-10;

/// Default ceiling for the population of the top Fock level of a converged
/// steady state.
pub const TAIL_DEFAULT: f64 = 1e-8;

/// Steady-state residual certificate: entrywise 1-norm of `L(rho_ss)`.
pub const STEADY_RESIDUAL: f64 = 1e-10;

/// Residual ceiling accepted by operations that take a steady state as input.
pub const STEADY_INPUT_RESIDUAL: f64 = 1e-8;

/// Default relative change of scalar observables between consecutive cutoffs
/// accepted by the automatic cutoff search.
pub const OBSERVABLE_CONVERGENCE: f64 = 1e-6;

/// Relative agreement required between the time-domain and resolvent spectrum
/// evaluations.
pub const SPECTRUM_CROSSCHECK: f64 = 1e-6;

/// Absolute floor allowed for spectral densities (small negative values from
/// truncation of the correlation integral).
pub const SPECTRUM_FLOOR: f64 = -1e-8;

/// Agreement between the Laguerre-series Wigner evaluation and the
/// displaced-parity spot check.
pub const WIGNER_SPOT_CHECK: f64 = 1e-8;

/// Allowed deviation of the Wigner normalization integral from 1 in strict mode.
pub const WIGNER_NORMALIZATION: f64 = 1e-3;

/// Norm of the classical right-hand side below which a point counts as a
/// fixed point of the flow.
pub const FIXED_POINT_RESIDUAL: f64 = 1e-10;

/// Jacobian eigenvalue real parts smaller than this cannot be classified.
pub const STABILITY_RESOLUTION: f64 = 1e-9;

/// Default guard radius around the phase-space origin (phase is singular at
/// R = 0 when a harmonic drive is present).
pub const R_MIN: f64 = 1e-9;
