//! Adaptive embedded Runge-Kutta integration on complex state vectors.
//!
//! One Dormand-Prince 5(4) implementation serves both the quantum side
//! (vectorized density matrices and the non-Hermitian initial conditions of
//! the regression theorem) and the classical amplitude-phase flow.  Step-size
//! control targets a local error per unit time, so the accumulated error over
//! a run of length `T` is of order `tol * T`.

use std::ops::ControlFlow;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorSettings {
    /// Local error per unit time, relative to the state scale.
    pub rtol: f64,
    /// Absolute floor of the error scale.
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    /// Smallest admissible step before declaring stiffness failure.
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-13,
            h_init: None,
            h_min: 1e-12,
            max_steps: 50_000_000,
        }
    }
}

impl IntegratorSettings {
    /// Preset for the classical flow: tight enough that the integration noise
    /// floor sits below the `|rhs| < 1e-12` fixed-point detection threshold.
    pub fn classical() -> Self {
        Self {
            rtol: 1e-13,
            atol: 1e-16,
            ..Self::default()
        }
    }
}

// Dormand-Prince 5(4) tableau
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// embedded 4th-order error coefficients (b - b_hat)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Reusable integrator carrying step size and the first-same-as-last stage
/// across calls, so sampling on a fine grid costs no controller restarts.
pub struct Dopri5 {
    settings: IntegratorSettings,
    t: f64,
    h: f64,
    k: [Vec<C64>; 7],
    y_new: Vec<C64>,
    y_stage: Vec<C64>,
    k1_valid: bool,
    steps: usize,
}

impl Dopri5 {
    pub fn new(settings: IntegratorSettings, t0: f64, dim: usize) -> Self {
        let zero = vec![C64::from(0.0); dim];
        Self {
            settings,
            t: t0,
            h: settings.h_init.unwrap_or(1e-3),
            k: std::array::from_fn(|_| zero.clone()),
            y_new: zero.clone(),
            y_stage: zero,
            k1_valid: false,
            steps: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Advance `y` from the current time to `t_target`, invoking `on_accept`
    /// after every accepted step.  Returns `true` if the callback requested an
    /// early stop.
    pub fn advance<F, C>(
        &mut self,
        rhs: &mut F,
        y: &mut [C64],
        t_target: f64,
        on_accept: &mut C,
    ) -> Result<bool>
    where
        F: FnMut(&[C64], &mut [C64]) -> Result<()>,
        C: FnMut(f64, &[C64]) -> ControlFlow<()>,
    {
        let dim = y.len();
        debug_assert_eq!(self.y_new.len(), dim);
        if t_target < self.t {
            return Err(Error::InvalidParams(
                "integration target precedes current time".into(),
            ));
        }
        while t_target - self.t > 1e-14 * t_target.abs().max(1.0) {
            if self.steps >= self.settings.max_steps {
                return Err(Error::SolverFailure {
                    context: format!("step budget exhausted at t = {:.6e}", self.t),
                    residual: f64::NAN,
                });
            }
            if !self.k1_valid {
                let (k1, rest) = self.k.split_at_mut(1);
                let _ = rest;
                rhs(y, &mut k1[0])?;
                self.k1_valid = true;
            }
            let h = self.h.min(t_target - self.t);
            if h < self.settings.h_min {
                return Err(Error::Stiffness { t: self.t });
            }

            self.stage(y, h, dim, rhs)?;
            self.steps += 1;

            // error per unit time, relative to the state scale
            let mut err_sq = 0.0;
            for i in 0..dim {
                let e = h
                    * (E1 * self.k[0][i]
                        + E3 * self.k[2][i]
                        + E4 * self.k[3][i]
                        + E5 * self.k[4][i]
                        + E6 * self.k[5][i]
                        + E7 * self.k[6][i]);
                let scale =
                    self.settings.atol + self.settings.rtol * y[i].norm().max(self.y_new[i].norm());
                let r = e.norm() / scale;
                err_sq += r * r;
            }
            let err = (err_sq / dim as f64).sqrt();
            let ratio = err / h;

            if ratio <= 1.0 {
                self.t += h;
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6); // FSAL
                let factor = (0.9 * ratio.max(1e-10).powf(-0.25)).clamp(0.2, 5.0);
                self.h = h * factor;
                if let ControlFlow::Break(()) = on_accept(self.t, y) {
                    return Ok(true);
                }
            } else {
                let factor = (0.9 * ratio.powf(-0.25)).clamp(0.1, 1.0);
                self.h = h * factor;
                if self.h < self.settings.h_min {
                    return Err(Error::Stiffness { t: self.t });
                }
            }
        }
        self.t = t_target;
        Ok(false)
    }

    fn stage<F>(&mut self, y: &[C64], h: f64, dim: usize, rhs: &mut F) -> Result<()>
    where
        F: FnMut(&[C64], &mut [C64]) -> Result<()>,
    {
        let hs = h;
        {
            let k1 = &self.k[0];
            for i in 0..dim {
                self.y_stage[i] = y[i] + hs * A21 * k1[i];
            }
        }
        let (head, tail) = self.k.split_at_mut(1);
        rhs(&self.y_stage, &mut tail[0])?; // k2
        let k1 = &head[0];
        let (k2s, tail2) = tail.split_at_mut(1);
        let k2 = &k2s[0];
        for i in 0..dim {
            self.y_stage[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(&self.y_stage, &mut tail2[0])?; // k3
        let (k3s, tail3) = tail2.split_at_mut(1);
        let k3 = &k3s[0];
        for i in 0..dim {
            self.y_stage[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(&self.y_stage, &mut tail3[0])?; // k4
        let (k4s, tail4) = tail3.split_at_mut(1);
        let k4 = &k4s[0];
        for i in 0..dim {
            self.y_stage[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(&self.y_stage, &mut tail4[0])?; // k5
        let (k5s, tail5) = tail4.split_at_mut(1);
        let k5 = &k5s[0];
        for i in 0..dim {
            self.y_stage[i] =
                y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs(&self.y_stage, &mut tail5[0])?; // k6
        let (k6s, tail6) = tail5.split_at_mut(1);
        let k6 = &k6s[0];
        for i in 0..dim {
            self.y_new[i] =
                y[i] + hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        rhs(&self.y_new, &mut tail6[0])?; // k7 = f(y_new), reused on accept
        Ok(())
    }
}

/// Integrate `y' = f(t-independent rhs)` from `t0` to `t1`.
pub fn integrate_adaptive<F>(
    rhs: &mut F,
    y: &mut [C64],
    t0: f64,
    t1: f64,
    settings: &IntegratorSettings,
) -> Result<()>
where
    F: FnMut(&[C64], &mut [C64]) -> Result<()>,
{
    let mut stepper = Dopri5::new(*settings, t0, y.len());
    stepper.advance(rhs, y, t1, &mut |_, _| ControlFlow::Continue(()))?;
    Ok(())
}
