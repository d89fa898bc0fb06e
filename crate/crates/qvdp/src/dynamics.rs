//! Time evolution under the Liouvillian and two-time correlation functions.
//!
//! The quantum regression theorem reduces `<b^dag(tau) b(0)>_ss` to evolving
//! the (non-Hermitian, traceless-in-general) matrix `V(tau)` with
//! `V(0) = b rho_ss` under the same generator, so one integrator serves both
//! state evolution and correlations.

use std::ops::ControlFlow;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{annihilation, expectation, DensityMatrix};
use crate::integrate::{Dopri5, IntegratorSettings};
use crate::liouvillian::{unvectorize, vectorize, Liouvillian};
use crate::tol;

/// Evolve a general complex matrix under `L` for `duration`.
///
/// This is the raw propagator; it does not require (or preserve) physicality
/// of the input and is what the regression theorem needs.
pub fn evolve_matrix(
    m0: &Array2<C64>,
    l: &Liouvillian,
    duration: f64,
    settings: &IntegratorSettings,
) -> Result<Array2<C64>> {
    let n = l.dim_n();
    if m0.nrows() != n || m0.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m0.nrows(),
        });
    }
    if duration.is_nan() || duration < 0.0 {
        return Err(Error::InvalidParams(format!(
            "duration must be >= 0, got {duration}"
        )));
    }
    if duration == 0.0 {
        return Ok(m0.clone());
    }
    let mut y = vectorize(m0);
    let csc = l.superop().matrix();
    let mut rhs = |x: &[C64], dx: &mut [C64]| {
        csc.matvec(x, dx);
        Ok(())
    };
    let mut stepper = Dopri5::new(*settings, 0.0, y.len());
    stepper.advance(&mut rhs, &mut y, duration, &mut |_, _| {
        ControlFlow::Continue(())
    })?;
    Ok(unvectorize(&y, n))
}

/// Evolve a density matrix for `duration` (in units of `1/gamma1`).
///
/// The trace drift over the run is certified to stay below 1e-9 before the
/// state is renormalized and re-wrapped; Hermiticity is restored from the
/// roundoff level the same way.
pub fn evolve(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    duration: f64,
    settings: &IntegratorSettings,
) -> Result<DensityMatrix> {
    if duration == 0.0 {
        return Ok(rho0.clone());
    }
    let out = evolve_matrix(rho0.matrix(), l, duration, settings)?;
    let tr: C64 = out.diag().iter().sum();
    let drift = (tr - C64::from(1.0)).norm();
    if drift > 1e-9 {
        return Err(Error::Accuracy(format!(
            "trace drifted by {drift:.3e} > 1e-9 over the run"
        )));
    }
    let herm = (&out + &crate::linalg::dagger(&out)).mapv(|z| z * 0.5 / tr);
    DensityMatrix::try_new(herm)
}

/// Evolve while recording the state at the requested times (ascending, >= 0).
pub fn evolve_sampled(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    times: &[f64],
    settings: &IntegratorSettings,
) -> Result<Vec<(f64, Array2<C64>)>> {
    let n = l.dim_n();
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rho0.dim(),
        });
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParams(
            "sample times must be ascending and non-negative".into(),
        ));
    }
    let mut y = vectorize(rho0.matrix());
    let csc = l.superop().matrix();
    let mut rhs = |x: &[C64], dx: &mut [C64]| {
        csc.matvec(x, dx);
        Ok(())
    };
    let mut stepper = Dopri5::new(*settings, 0.0, y.len());
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        stepper.advance(&mut rhs, &mut y, t, &mut |_, _| ControlFlow::Continue(()))?;
        out.push((t, unvectorize(&y, n)));
    }
    Ok(out)
}

/// Settings for the correlation integration.
#[derive(Debug, Clone, Copy)]
pub struct CorrelationSettings {
    /// Uniform sample spacing of the lag grid, in `1/gamma1`.  The default is
    /// fine enough that the discrete transform downstream meets its 1e-6
    /// cross-validation against the resolvent.
    pub dtau: f64,
    /// Hard upper bound on the lag.
    pub tau_max: f64,
    /// Decay target: the incoherent part must fall below
    /// `decay_rel * |g_inc(0)|`.
    pub decay_rel: f64,
    /// Time span that must stay below the decay target before terminating
    /// (guards against beat nodes).
    pub decay_window: f64,
    pub integrator: IntegratorSettings,
}

impl Default for CorrelationSettings {
    fn default() -> Self {
        Self {
            dtau: 6.25e-4,
            tau_max: 200.0,
            decay_rel: 1e-8,
            decay_window: 2.0,
            integrator: IntegratorSettings::default(),
        }
    }
}

pub(crate) struct ResolventHandle {
    pub l: Arc<Liouvillian>,
    /// Vectorized `b rho_ss`.
    pub v0: Vec<C64>,
}

/// Two-time correlation `g(tau) = <b^dag(tau) b(0)>_ss` on a uniform lag grid.
pub struct CorrelationSeries {
    pub dtau: f64,
    /// `g(k * dtau)` for `k = 0..len`.
    pub values: Vec<C64>,
    /// `|<b>_ss|^2`, the `tau -> infinity` limit of `g` (weight of the
    /// coherent delta line of the spectrum).
    pub coherent_offset: f64,
    /// `g(0) = n_bar`.
    pub n_bar: f64,
    /// `g'(0)`; exact (`Tr[b^dag L(b rho_ss)]`) when built from a Liouvillian,
    /// a one-sided finite difference for externally supplied samples.  Used by
    /// the spectrum transform's endpoint correction.
    pub g_prime0: C64,
    /// Whether the incoherent part reached the decay target before `tau_max`.
    pub decayed: bool,
    /// `|g_inc(tau_end)| / |g_inc(0)|`.
    pub residual: f64,
    pub(crate) generator: Option<ResolventHandle>,
}

impl CorrelationSeries {
    /// Wrap an externally supplied series (synthetic tests, file input).
    pub fn from_samples(dtau: f64, values: Vec<C64>, coherent_offset: f64) -> Result<Self> {
        if dtau <= 0.0 || values.len() < 3 {
            return Err(Error::InvalidParams(
                "series needs dtau > 0 and at least 3 samples".into(),
            ));
        }
        let g0 = values[0];
        let g_inc0 = (g0 - C64::from(coherent_offset)).norm().max(1e-300);
        let residual = (values[values.len() - 1] - C64::from(coherent_offset)).norm() / g_inc0;
        // second-order one-sided derivative estimate
        let g_prime0 = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dtau);
        Ok(Self {
            dtau,
            n_bar: g0.re,
            values,
            coherent_offset,
            g_prime0,
            decayed: true,
            residual,
            generator: None,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tau_end(&self) -> f64 {
        self.dtau * (self.values.len() - 1) as f64
    }
}

/// Compute `g(tau) = Tr[b^dag e^{L tau}(b rho_ss)]` by integrating the
/// regression-theorem initial condition on a uniform lag grid, terminating
/// once the incoherent part has decayed (or at `tau_max`).
pub fn correlation_bdag_b(
    rho_ss: &DensityMatrix,
    l: &Liouvillian,
    settings: &CorrelationSettings,
) -> Result<CorrelationSeries> {
    let n = l.dim_n();
    if rho_ss.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rho_ss.dim(),
        });
    }
    let residual_in = l.residual_one_norm(rho_ss);
    if residual_in > tol::STEADY_INPUT_RESIDUAL {
        return Err(Error::Precondition(format!(
            "correlation requires a converged steady state; residual {residual_in:.3e}"
        )));
    }
    if settings.dtau <= 0.0 || settings.tau_max <= 0.0 {
        return Err(Error::InvalidParams(
            "dtau and tau_max must be positive".into(),
        ));
    }

    let b = annihilation(l.spec());
    let beta = expectation(&b, rho_ss)?;
    let coherent_offset = beta.norm_sqr();

    let v0 = b.matrix().dot(rho_ss.matrix());
    let mut y = vectorize(&v0);
    let v0_vec = y.clone();

    // Tr[b^dag M] = sum_n sqrt(n+1) M[n, n+1] under column stacking
    let trace_bdag = |x: &[C64]| -> C64 {
        let mut acc = C64::from(0.0);
        for k in 0..n - 1 {
            acc += ((k + 1) as f64).sqrt() * x[k + (k + 1) * n];
        }
        acc
    };

    let g0 = trace_bdag(&y);
    let n_bar = rho_ss.mean_occupation();
    debug_assert!(
        (g0.re - n_bar).abs() <= 1e-8,
        "g(0) = {} vs n_bar = {}",
        g0.re,
        n_bar
    );
    let g_inc0 = (g0 - C64::from(coherent_offset)).norm().max(1e-300);

    // exact initial slope, g'(0) = Tr[b^dag L(V0)]
    let g_prime0 = {
        let mut dv = vec![C64::from(0.0); y.len()];
        l.superop().matrix().matvec(&y, &mut dv);
        trace_bdag(&dv)
    };

    let csc = l.superop().matrix();
    let mut rhs = |x: &[C64], dx: &mut [C64]| {
        csc.matvec(x, dx);
        Ok(())
    };
    let mut stepper = Dopri5::new(settings.integrator, 0.0, y.len());

    let mut values = vec![g0];
    let steps = (settings.tau_max / settings.dtau).ceil() as usize;
    let window_samples = (settings.decay_window / settings.dtau).ceil() as usize;
    let mut below_count = 0usize;
    let mut decayed = false;
    for k in 1..=steps {
        let tau = settings.dtau * k as f64;
        stepper.advance(&mut rhs, &mut y, tau, &mut |_, _| ControlFlow::Continue(()))?;
        let g = trace_bdag(&y);
        values.push(g);
        let inc = (g - C64::from(coherent_offset)).norm();
        if inc <= settings.decay_rel * g_inc0 {
            below_count += 1;
            if below_count >= window_samples {
                decayed = true;
                break;
            }
        } else {
            below_count = 0;
        }
    }
    let residual = (values[values.len() - 1] - C64::from(coherent_offset)).norm() / g_inc0;
    if !decayed && residual <= settings.decay_rel {
        decayed = true;
    }

    Ok(CorrelationSeries {
        dtau: settings.dtau,
        values,
        coherent_offset,
        n_bar,
        g_prime0,
        decayed,
        residual,
        generator: Some(ResolventHandle {
            l: Arc::new(l.clone()),
            v0: v0_vec,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fock_state, HilbertSpec};
    use crate::liouvillian::assemble;
    use crate::params::SystemParams;
    use crate::steady_state::solve;
    use approx::assert_relative_eq;

    #[test]
    fn zero_duration_returns_input_exactly() {
        let spec = HilbertSpec::new(6).unwrap();
        let params = SystemParams::new(0.3, 0.5, 0.2, 0.1, 1.0, 2.0).unwrap();
        let l = assemble(&params, spec);
        let rho0 = crate::fock::thermal_state(0.3, spec).unwrap();
        let out = evolve(&rho0, &l, 0.0, &IntegratorSettings::default()).unwrap();
        assert_eq!(out.matrix(), rho0.matrix());
    }

    #[test]
    fn short_time_pump_rate() {
        // p1(dt) = gamma1 * dt + O(dt^2) starting from vacuum, undriven
        let spec = HilbertSpec::new(8).unwrap();
        let params = SystemParams::undriven(3.0).unwrap();
        let l = assemble(&params, spec);
        let vac = fock_state(0, spec).unwrap();
        let dt = 1e-4;
        let out = evolve(&vac, &l, dt, &IntegratorSettings::default()).unwrap();
        assert_relative_eq!(out.population(1), params.gamma1 * dt, max_relative = 1e-3);
    }

    #[test]
    fn steady_state_is_fixed_point_of_flow() {
        let spec = HilbertSpec::new(14).unwrap();
        let params = SystemParams::new(0.4, 0.7, 0.5, 0.9, 1.0, 3.0).unwrap();
        let l = assemble(&params, spec);
        let ss = solve(&l).unwrap();
        let out = evolve(&ss.rho, &l, 10.0, &IntegratorSettings::default()).unwrap();
        let diff = out.matrix() - ss.rho.matrix();
        assert!(crate::linalg::max_abs(&diff) <= 1e-8);
    }

    #[test]
    fn trace_and_hermiticity_along_trajectory() {
        let spec = HilbertSpec::new(10).unwrap();
        let params = SystemParams::new(0.2, 0.8, 0.4, 0.3, 1.0, 2.0).unwrap();
        let l = assemble(&params, spec);
        let rho0 = fock_state(0, spec).unwrap();
        let times: Vec<f64> = (0..=40).map(|k| 0.1 * k as f64).collect();
        let traj = evolve_sampled(&rho0, &l, &times, &IntegratorSettings::default()).unwrap();
        for (_, m) in traj {
            let tr: C64 = m.diag().iter().sum();
            assert!((tr - C64::from(1.0)).norm() <= 1e-9);
            assert!(crate::linalg::hermiticity_error(&m) <= 1e-9);
        }
    }

    #[test]
    fn correlation_starts_at_n_bar() {
        let spec = HilbertSpec::new(12).unwrap();
        let params = SystemParams::undriven(3.0).unwrap();
        let l = assemble(&params, spec);
        let ss = solve(&l).unwrap();
        let settings = CorrelationSettings {
            tau_max: 1.0,
            ..Default::default()
        };
        let g = correlation_bdag_b(&ss.rho, &l, &settings).unwrap();
        assert_relative_eq!(g.values[0].re, ss.rho.mean_occupation(), epsilon = 1e-8);
        assert!(g.values[0].im.abs() <= 1e-10);
        assert!(g.coherent_offset.abs() <= 1e-20);
    }

    #[test]
    fn undriven_correlation_decays_to_zero() {
        let spec = HilbertSpec::new(12).unwrap();
        let params = SystemParams::new(0.5, 0.0, 0.0, 0.0, 1.0, 3.0).unwrap();
        let l = assemble(&params, spec);
        let ss = solve(&l).unwrap();
        let settings = CorrelationSettings {
            dtau: 5e-3,
            ..Default::default()
        };
        let g = correlation_bdag_b(&ss.rho, &l, &settings).unwrap();
        assert!(g.decayed, "residual {:.3e}", g.residual);
        // |<b>_ss|^2 = 0 by phase symmetry
        assert!(g.coherent_offset <= 1e-20);
        let last = g.values.last().unwrap().norm();
        assert!(last <= 1.1e-6 * g.values[0].norm());
        // |g| decays monotonically after the initial transient: each later
        // sample stays below the running maximum of the earlier tail
        let m = g.values.len();
        let envelope: Vec<f64> = g.values.iter().map(|z| z.norm()).collect();
        let mut peak = envelope[m / 10];
        for &e in &envelope[m / 10..] {
            assert!(
                e <= peak * (1.0 + 1e-6) + 1e-15,
                "envelope grew after transient"
            );
            peak = peak.min(e);
        }
    }

    #[test]
    fn stationarity_symmetry_small_n() {
        // Tr[b e^{L tau}(rho b^dag)] = conj(Tr[b^dag e^{L tau}(b rho)])
        let spec = HilbertSpec::new(6).unwrap();
        let params = SystemParams::new(0.4, 0.6, 0.7, 0.8, 1.0, 2.0).unwrap();
        let l = assemble(&params, spec);
        let ss = solve(&l).unwrap();
        let b = annihilation(spec);
        let bd = b.dagger();
        let tau = 0.7;
        let settings = IntegratorSettings::default();

        let fwd0 = b.matrix().dot(ss.rho.matrix());
        let fwd = evolve_matrix(&fwd0, &l, tau, &settings).unwrap();
        let g_fwd = (bd.matrix().dot(&fwd)).diag().iter().sum::<C64>();

        let rev0 = ss.rho.matrix().dot(bd.matrix());
        let rev = evolve_matrix(&rev0, &l, tau, &settings).unwrap();
        let g_rev = (b.matrix().dot(&rev)).diag().iter().sum::<C64>();

        assert!(
            (g_rev - g_fwd.conj()).norm() <= 1e-9,
            "{g_rev} vs conj {g_fwd}"
        );
    }

    #[test]
    fn correlation_rejects_non_steady_input() {
        let spec = HilbertSpec::new(8).unwrap();
        let params = SystemParams::undriven(2.0).unwrap();
        let l = assemble(&params, spec);
        let rho = fock_state(0, spec).unwrap();
        let err = correlation_bdag_b(&rho, &l, &CorrelationSettings::default());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }
}
