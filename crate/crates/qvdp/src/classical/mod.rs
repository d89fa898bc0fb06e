//! Classical amplitude-phase dynamics of the driven oscillator:
//!
//! ```text
//! R'   = (gamma1/2) R - gamma2 R^3 - F cos(phi) - 2 eta R cos(2 phi - theta)
//! phi' = -Delta + (F/R) sin(phi) + 2 eta sin(2 phi - theta)
//! ```
//!
//! with `<b> = R e^{i phi}`.  Fixed points, stability, lock phases,
//! Arnold-tongue boundaries, and the pitchfork threshold live here;
//! nullcline extraction is in [`nullclines`].

pub mod nullclines;

pub use nullclines::{intersections, nullclines, to_cartesian, Nullclines, PhaseGrid, Segment};

use std::f64::consts::{PI, TAU};
use std::ops::ControlFlow;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::integrate::{Dopri5, IntegratorSettings};
use crate::params::{wrap_angle, SystemParams};
use crate::tol;

/// Point of the amplitude-phase plane; `phi` is wrapped to `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub r: f64,
    pub phi: f64,
}

impl PhasePoint {
    pub fn new(r: f64, phi: f64) -> Result<Self> {
        if r.is_nan() || r < 0.0 || !r.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidParams(format!(
                "invalid phase point (R = {r}, phi = {phi})"
            )));
        }
        Ok(Self {
            r,
            phi: wrap_angle(phi),
        })
    }
}

/// Distance in the cylinder metric (phase wrapped).
pub fn phase_plane_distance(a: PhasePoint, b: PhasePoint) -> f64 {
    let dphi = (a.phi - b.phi).rem_euclid(TAU);
    let dphi = dphi.min(TAU - dphi);
    ((a.r - b.r).powi(2) + dphi * dphi).sqrt()
}

/// Right-hand side `(R', phi')`.
///
/// The phase equation is singular at the origin when a harmonic drive is
/// present; `R <= r_min` with `F != 0` is rejected.
pub fn rhs(p: PhasePoint, params: &SystemParams) -> Result<(f64, f64)> {
    rhs_guarded(p.r, p.phi, params, tol::R_MIN)
}

fn rhs_guarded(r: f64, phi: f64, params: &SystemParams, r_min: f64) -> Result<(f64, f64)> {
    if params.force != 0.0 && r <= r_min {
        return Err(Error::PhaseSingularity { r_min });
    }
    let two_phi = 2.0 * phi - params.theta;
    let r_dot = 0.5 * params.gamma1 * r
        - params.gamma2 * r.powi(3)
        - params.force * phi.cos()
        - 2.0 * params.eta * r * two_phi.cos();
    let phi_dot = -params.delta
        + if params.force != 0.0 {
            params.force / r * phi.sin()
        } else {
            0.0
        }
        + 2.0 * params.eta * two_phi.sin();
    Ok((r_dot, phi_dot))
}

/// Analytic Jacobian of [`rhs`] at a point.
pub fn jacobian(p: PhasePoint, params: &SystemParams) -> [[f64; 2]; 2] {
    let (r, phi) = (p.r, p.phi);
    let two_phi = 2.0 * phi - params.theta;
    let dr_dr =
        0.5 * params.gamma1 - 3.0 * params.gamma2 * r * r - 2.0 * params.eta * two_phi.cos();
    let dr_dphi = params.force * phi.sin() + 4.0 * params.eta * r * two_phi.sin();
    let dphi_dr = -params.force / (r * r) * phi.sin();
    let dphi_dphi = params.force / r * phi.cos() + 4.0 * params.eta * two_phi.cos();
    [[dr_dr, dr_dphi], [dphi_dr, dphi_dphi]]
}

/// Stability class of a fixed point from the Jacobian eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    StableNode,
    StableSpiral,
    UnstableNode,
    UnstableSpiral,
    Saddle,
}

impl Stability {
    pub fn is_stable(self) -> bool {
        matches!(self, Stability::StableNode | Stability::StableSpiral)
    }

    pub fn label(self) -> &'static str {
        match self {
            Stability::StableNode => "stable-node",
            Stability::StableSpiral => "stable-spiral",
            Stability::UnstableNode => "unstable-node",
            Stability::UnstableSpiral => "unstable-spiral",
            Stability::Saddle => "saddle",
        }
    }
}

/// Fixed point with its classification.
#[derive(Debug, Clone, Copy)]
pub struct FixedPoint {
    pub point: PhasePoint,
    pub eigenvalues: (C64, C64),
    pub stability: Stability,
}

/// Eigenvalues of a real 2x2 matrix.
pub fn eigenvalues_2x2(j: &[[f64; 2]; 2]) -> (C64, C64) {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = C64::from(tr * tr - 4.0 * det).sqrt();
    ((C64::from(tr) + disc) * 0.5, (C64::from(tr) - disc) * 0.5)
}

/// Classify eigenvalues; real parts within the resolution threshold of zero
/// cannot be classified and are rejected.
pub fn classify(eigs: (C64, C64)) -> Result<Stability> {
    let (l1, l2) = eigs;
    let min_re = l1.re.abs().min(l2.re.abs());
    if min_re < tol::STABILITY_RESOLUTION {
        return Err(Error::MarginalStability { re: min_re });
    }
    let real_pair =
        l1.im.abs() < tol::STABILITY_RESOLUTION && l2.im.abs() < tol::STABILITY_RESOLUTION;
    Ok(if real_pair {
        match (l1.re > 0.0, l2.re > 0.0) {
            (false, false) => Stability::StableNode,
            (true, true) => Stability::UnstableNode,
            _ => Stability::Saddle,
        }
    } else if l1.re < 0.0 {
        Stability::StableSpiral
    } else {
        Stability::UnstableSpiral
    })
}

/// Multistart Newton search settings.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointSearch {
    /// Starts per axis of the (R, phi) grid.
    pub grid: usize,
    /// Upper amplitude bound; defaults to `3 R0 + 3`.
    pub r_max: Option<f64>,
    pub max_iter: usize,
    /// Deduplication distance in the cylinder metric.
    pub dedup: f64,
}

impl Default for FixedPointSearch {
    fn default() -> Self {
        Self {
            grid: 24,
            r_max: None,
            max_iter: 80,
            dedup: 1e-6,
        }
    }
}

/// All fixed points of the flow with `R` in `(r_min, r_max]`, found by Newton
/// iteration from a multistart grid and classified by the Jacobian.
pub fn fixed_points(params: &SystemParams, search: &FixedPointSearch) -> Result<Vec<FixedPoint>> {
    let r_max = search
        .r_max
        .unwrap_or(3.0 * params.limit_cycle_radius() + 3.0);
    let r_lo = 1e-3 * r_max.min(1.0);
    let mut found: Vec<FixedPoint> = Vec::new();
    for i in 0..search.grid {
        let r0 = r_lo + (r_max - r_lo) * (i as f64 + 0.5) / search.grid as f64;
        for j in 0..search.grid {
            let phi0 = TAU * (j as f64 + 0.5) / search.grid as f64;
            if let Some(root) = newton_root(r0, phi0, params, r_max, search.max_iter) {
                let point = PhasePoint::new(root.0, root.1)?;
                if found
                    .iter()
                    .any(|fp| phase_plane_distance(fp.point, point) < search.dedup)
                {
                    continue;
                }
                let eigs = eigenvalues_2x2(&jacobian(point, params));
                let stability = classify(eigs)?;
                found.push(FixedPoint {
                    point,
                    eigenvalues: eigs,
                    stability,
                });
            }
        }
    }
    found.sort_by(|a, b| {
        (a.point.r, a.point.phi)
            .partial_cmp(&(b.point.r, b.point.phi))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(found)
}

fn newton_root(
    mut r: f64,
    mut phi: f64,
    params: &SystemParams,
    r_max: f64,
    max_iter: usize,
) -> Option<(f64, f64)> {
    for _ in 0..max_iter {
        let f = rhs_guarded(r, phi, params, tol::R_MIN).ok()?;
        let fnorm = f.0.abs().max(f.1.abs());
        if fnorm < 1e-13 {
            // inside the admissible band?
            if r > tol::R_MIN && r <= r_max && r.is_finite() && phi.is_finite() {
                return Some((r, phi));
            }
            return None;
        }
        let j = jacobian(
            PhasePoint {
                r,
                phi: wrap_angle(phi),
            },
            params,
        );
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 {
            return None;
        }
        let mut dr = (-f.0 * j[1][1] + f.1 * j[0][1]) / det;
        let mut dphi = (-f.1 * j[0][0] + f.0 * j[1][0]) / det;
        // damp oversized steps
        let step = dr.abs().max(dphi.abs());
        if step > 0.5 {
            let scale = 0.5 / step;
            dr *= scale;
            dphi *= scale;
        }
        r += dr;
        phi += dphi;
        if !r.is_finite() || !phi.is_finite() || r > 4.0 * r_max || r < tol::R_MIN {
            return None;
        }
    }
    None
}

/// Integration output of the classical flow.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    /// Whether the trajectory reached `|rhs| < 1e-12` (a fixed point) before
    /// the duration elapsed.
    pub converged: bool,
    /// Final state with the phase left unwrapped (drift diagnostics).
    pub final_unwrapped: (f64, f64),
}

/// Integrate the flow from `p0` for `duration`, terminating early on
/// fixed-point convergence.  The phase is wrapped on output only, so the
/// unwrapped drift remains observable in `final_unwrapped`.
pub fn integrate(
    p0: PhasePoint,
    params: &SystemParams,
    duration: f64,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    if p0.r <= tol::R_MIN {
        return Err(Error::Precondition(format!(
            "initial amplitude {} below R_min",
            p0.r
        )));
    }
    if duration.is_nan() || duration < 0.0 {
        return Err(Error::InvalidParams("duration must be >= 0".into()));
    }
    let params = *params;
    let mut rhs_fn = move |y: &[C64], dy: &mut [C64]| {
        let (r_dot, phi_dot) = rhs_guarded(y[0].re, y[1].re, &params, tol::R_MIN)?;
        dy[0] = C64::from(r_dot);
        dy[1] = C64::from(phi_dot);
        Ok(())
    };
    let mut y = vec![C64::from(p0.r), C64::from(p0.phi)];
    let mut times = vec![0.0];
    let mut points = vec![p0];
    let mut converged = false;

    let mut stepper = Dopri5::new(*settings, 0.0, 2);
    let mut on_accept = |t: f64, y: &[C64]| {
        times.push(t);
        points.push(PhasePoint {
            r: y[0].re,
            phi: wrap_angle(y[1].re),
        });
        match rhs_guarded(y[0].re, y[1].re, &params, tol::R_MIN) {
            Ok((r_dot, phi_dot)) => {
                if r_dot.abs().max(phi_dot.abs()) < 1e-12 {
                    converged = true;
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            }
            Err(_) => ControlFlow::Continue(()),
        }
    };
    stepper.advance(&mut rhs_fn, &mut y, duration, &mut on_accept)?;
    Ok(Trajectory {
        times,
        points,
        converged,
        final_unwrapped: (y[0].re, y[1].re),
    })
}

/// The two phase-locked solutions of the squeezing-only drive (`F = 0`).
#[derive(Debug, Clone, Copy)]
pub struct LockedPhase {
    /// `phi_ss = (pi + theta)/2 - arcsin(Delta / 2 eta) / 2`, wrapped.
    pub principal: f64,
    /// The companion branch `principal + pi` (the phase enters through
    /// `2 phi`, so the locked set is a pair).
    pub companion: f64,
}

/// Closed-form lock phase of the squeezing-driven oscillator; exists for
/// `eta >= |Delta| / 2`.
pub fn squeezing_lock_phase(params: &SystemParams) -> Result<LockedPhase> {
    if params.eta <= 0.0 {
        return Err(Error::Precondition(format!(
            "lock phase needs eta > 0, got {}",
            params.eta
        )));
    }
    let threshold = params.delta.abs() / 2.0;
    if params.eta < threshold * (1.0 - 1e-12) {
        return Err(Error::NoLock {
            eta: params.eta,
            threshold,
        });
    }
    let ratio = (params.delta / (2.0 * params.eta)).clamp(-1.0, 1.0);
    let principal = wrap_angle(0.5 * (PI + params.theta) - 0.5 * ratio.asin());
    Ok(LockedPhase {
        principal,
        companion: wrap_angle(principal + PI),
    })
}

/// Arnold-tongue boundaries over a detuning range: the squeezing boundary
/// `eta_min = |Delta|/2` (independent of the damping rates) and the harmonic
/// boundary `F_min = |Delta| R0`.
#[derive(Debug, Clone)]
pub struct ArnoldBoundaries {
    pub deltas: Vec<f64>,
    pub eta_min: Vec<f64>,
    pub force_min: Vec<f64>,
}

pub fn arnold_boundaries(params: &SystemParams, deltas: &[f64]) -> ArnoldBoundaries {
    let r0 = params.limit_cycle_radius();
    ArnoldBoundaries {
        deltas: deltas.to_vec(),
        eta_min: deltas.iter().map(|d| d.abs() / 2.0).collect(),
        force_min: deltas.iter().map(|d| d.abs() * r0).collect(),
    }
}

/// Critical squeezing of the pitchfork bifurcation at `Delta = 0`, `theta = 0`:
/// the root of the joint system
/// `{(gamma1/2 - 2 eta) R - gamma2 R^3 + F = 0, F = 4 eta R}`,
/// i.e. the smallest `eta` at which the locked phase `phi = pi` turns unstable.
pub fn pitchfork_critical_eta(params: &SystemParams) -> Result<f64> {
    if params.delta.abs() > 1e-12 {
        return Err(Error::Precondition(
            "pitchfork threshold requires Delta = 0".into(),
        ));
    }
    let theta_off = params.theta.min(TAU - params.theta);
    if theta_off > 1e-12 {
        return Err(Error::Precondition(
            "pitchfork threshold requires theta = 0".into(),
        ));
    }
    if params.force <= 0.0 {
        return Err(Error::Precondition(
            "pitchfork threshold requires F > 0".into(),
        ));
    }
    // eliminating F = 4 eta R turns the amplitude equation into
    // gamma2 R^3 - (gamma1/2) R - F/2 = 0, with a single positive root
    let g = |r: f64| params.gamma2 * r.powi(3) - 0.5 * params.gamma1 * r - 0.5 * params.force;
    let mut hi = params.limit_cycle_radius().max(1.0);
    while g(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::SolverFailure {
                context: "pitchfork bracketing".into(),
                residual: f64::NAN,
            });
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_c = 0.5 * (lo + hi);
    Ok(params.force / (4.0 * r_c))
}
