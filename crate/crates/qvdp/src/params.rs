//! Physical parameters of the driven van der Pol oscillator.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Parameters of the rotating-frame master equation, in units of the linear
/// pump rate `gamma1` (which defaults to 1 and sets the frequency scale).
///
/// * `delta` — detuning of the oscillator from the drive frame.
/// * `force` — harmonic drive strength F.
/// * `eta` — squeezing (two-photon drive) strength.
/// * `theta` — pump phase, wrapped into `[0, 2*pi)`.
/// * `gamma1` — linear pump rate (> 0, reference scale).
/// * `gamma2` — nonlinear (two-photon) damping rate (> 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub delta: f64,
    pub force: f64,
    pub eta: f64,
    pub theta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl SystemParams {
    pub fn new(
        delta: f64,
        force: f64,
        eta: f64,
        theta: f64,
        gamma1: f64,
        gamma2: f64,
    ) -> Result<Self> {
        let fields = [
            ("delta", delta),
            ("force", force),
            ("eta", eta),
            ("theta", theta),
            ("gamma1", gamma1),
            ("gamma2", gamma2),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite, got {value}"
                )));
            }
        }
        if gamma1 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "gamma1 must be > 0, got {gamma1}"
            )));
        }
        if gamma2 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "gamma2 must be > 0, got {gamma2}"
            )));
        }
        Ok(Self {
            delta,
            force,
            eta,
            theta: wrap_angle(theta),
            gamma1,
            gamma2,
        })
    }

    /// Undriven oscillator with the given damping ratio and `gamma1 = 1`.
    pub fn undriven(gamma2: f64) -> Result<Self> {
        Self::new(0.0, 0.0, 0.0, 0.0, 1.0, gamma2)
    }

    /// Radius of the undriven classical limit cycle, `sqrt(gamma1 / 2 gamma2)`.
    pub fn limit_cycle_radius(&self) -> f64 {
        (self.gamma1 / (2.0 * self.gamma2)).sqrt()
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            delta: 0.0,
            force: 0.0,
            eta: 0.0,
            theta: 0.0,
            gamma1: 1.0,
            gamma2: 1.0,
        }
    }
}

/// Wrap an angle into `[0, 2*pi)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let mut w = phi % TAU;
    if w < 0.0 {
        w += TAU;
    }
    // `-1e-18 % TAU` rounds to TAU itself; fold that back.
    if w >= TAU {
        w = 0.0;
    }
    w
}
