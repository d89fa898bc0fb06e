//! Quantum and classical simulation of the squeezing-driven van der Pol
//! oscillator.
//!
//! The crate solves the rotating-frame Lindblad master equation of a
//! self-sustained oscillator subject to a harmonic drive `F` and a two-photon
//! (squeezing) drive `eta` in a truncated Fock space, extracts synchronization
//! observables (steady states, power spectra, observed frequency, FWHM,
//! Mandel Q, Wigner functions, phase distributions), and analyzes the
//! corresponding classical amplitude-phase flow (fixed points, nullclines,
//! lock phases, Arnold-tongue boundaries, pitchfork threshold).
//!
//! Parameters are expressed in units of the linear pump rate `gamma1`
//! (defaulting to 1).  All computations are deterministic; values are
//! immutable after construction and safe to share across threads.

pub mod classical;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod integrate;
pub mod linalg;
pub mod liouvillian;
pub mod observables;
pub mod params;
pub mod sparse;
pub mod steady_state;
pub mod tol;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, HilbertSpec, QuantumOperator};
pub use liouvillian::Liouvillian;
pub use params::SystemParams;
