//! Steady-state solver with automatic Fock-cutoff adaptation.
//!
//! The null-space problem `L vec(rho) = 0, Tr(rho) = 1` is made nonsingular by
//! replacing the first row of the sparse system (a diagonal-position row,
//! which is linearly dependent on the other diagonal rows through trace
//! preservation) with the trace constraint, and solved by direct sparse LU.
//! If the direct solve does not reach the residual certificate, a shifted
//! inverse iteration recovers the smallest singular vector and also probes for
//! accidental degeneracy.

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, HilbertSpec};
use crate::liouvillian::{assemble, unvectorize, Liouvillian};
use crate::observables::mandel_q;
use crate::params::SystemParams;
use crate::sparse::CscMatrix;
use crate::tol;

/// Converged steady state together with its certificates.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// Entrywise 1-norm of `L vec(rho)`.
    pub residual: f64,
    /// Smallest eigenvalue of `rho` (reported, never projected away).
    pub min_eigenvalue: f64,
}

/// Settings for the doubling cutoff search.
#[derive(Debug, Clone, Copy)]
pub struct CutoffPolicy {
    pub start: usize,
    pub ceiling: usize,
    /// Ceiling on the top-level population of the accepted state.
    pub tail_tol: f64,
    /// Allowed change of `n_bar` and `Q_M` between consecutive cutoffs,
    /// relative to `max(1, |value|)`.
    pub obs_tol: f64,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        Self {
            start: 16,
            ceiling: 256,
            tail_tol: tol::TAIL_DEFAULT,
            obs_tol: tol::OBSERVABLE_CONVERGENCE,
        }
    }
}

fn ensure_sequential_backend() {
    use std::sync::Once;
    static ONCE: Once = Once::new();
    // deterministic output across worker-pool settings requires the linear
    // algebra backend to stay off the global thread pool
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

/// Solve for the unique steady state of `L`.
pub fn solve(l: &Liouvillian) -> Result<SteadyState> {
    ensure_sequential_backend();
    let n = l.dim_n();
    let dim = n * n;

    // replace row 0 with the trace constraint
    let mut triplets: Vec<(usize, usize, C64)> = l
        .superop()
        .matrix()
        .triplets()
        .filter(|&(r, _, _)| r != 0)
        .collect();
    for j in 0..n {
        triplets.push((0, j * n + j, C64::from(1.0)));
    }
    let modified = CscMatrix::from_triplets(dim, &triplets);

    match direct_solve(&modified, l) {
        Ok(state) => Ok(state),
        Err(direct_err) => inverse_iteration(l).map_err(|fallback_err| {
            if matches!(fallback_err, Error::DegenerateSteadyState) {
                fallback_err
            } else {
                direct_err
            }
        }),
    }
}

/// Assemble the Liouvillian at a fixed cutoff and solve.
pub fn solve_at(params: &SystemParams, spec: HilbertSpec) -> Result<SteadyState> {
    solve(&assemble(params, spec))
}

fn to_faer(m: &CscMatrix) -> Result<SparseColMat<usize, C64>> {
    let trips: Vec<Triplet<usize, usize, C64>> = m
        .triplets()
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    SparseColMat::try_new_from_triplets(m.dim(), m.dim(), &trips).map_err(|e| {
        Error::SolverFailure {
            context: format!("sparse assembly: {e:?}"),
            residual: f64::NAN,
        }
    })
}

fn direct_solve(modified: &CscMatrix, l: &Liouvillian) -> Result<SteadyState> {
    let dim = modified.dim();
    let mat = to_faer(modified)?;
    let lu = mat.sp_lu().map_err(|e| Error::SolverFailure {
        context: format!("sparse LU: {e:?}"),
        residual: f64::NAN,
    })?;

    let mut rhs = faer::Mat::<C64>::zeros(dim, 1);
    rhs[(0, 0)] = C64::from(1.0);
    let sol = lu.solve(&rhs);
    let mut x: Vec<C64> = (0..dim).map(|i| sol[(i, 0)]).collect();

    // a couple of rounds of iterative refinement tighten the residual
    // certificate at negligible cost
    let mut work = vec![C64::from(0.0); dim];
    for _ in 0..2 {
        modified.matvec(&x, &mut work);
        let mut r = faer::Mat::<C64>::zeros(dim, 1);
        r[(0, 0)] = C64::from(1.0) - work[0];
        let mut rnorm: f64 = r[(0, 0)].norm();
        for i in 1..dim {
            r[(i, 0)] = -work[i];
            rnorm = rnorm.max(work[i].norm());
        }
        if rnorm < 1e-16 {
            break;
        }
        let dx = lu.solve(&r);
        for i in 0..dim {
            x[i] += dx[(i, 0)];
        }
    }

    finalize(&x, l)
}

fn finalize(x: &[C64], l: &Liouvillian) -> Result<SteadyState> {
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SolverFailure {
            context: "solution contains non-finite entries (singular system)".into(),
            residual: f64::NAN,
        });
    }
    let n = l.dim_n();
    let raw = unvectorize(x, n);
    let herm = (&raw + &crate::linalg::dagger(&raw)).mapv(|z| z * 0.5);
    let tr: C64 = herm.diag().iter().sum();
    if tr.norm() < 1e-300 {
        return Err(Error::SolverFailure {
            context: "steady-state solution has zero trace".into(),
            residual: f64::NAN,
        });
    }
    let normalized = herm.mapv(|z| z / tr);
    let rho = DensityMatrix::try_new(normalized).map_err(|e| Error::SolverFailure {
        context: format!("solution not physical: {e}"),
        residual: f64::NAN,
    })?;

    let residual = l.residual_one_norm(&rho);
    if residual > tol::STEADY_RESIDUAL {
        return Err(Error::SolverFailure {
            context: "residual certificate".into(),
            residual,
        });
    }
    let min_eigenvalue = rho.min_eigenvalue()?;
    if min_eigenvalue < tol::MIN_EIGENVALUE {
        return Err(Error::UnphysicalState(format!(
            "steady state has eigenvalue {min_eigenvalue:.3e} below {:.1e} (cutoff or solver defect)",
            tol::MIN_EIGENVALUE
        )));
    }
    Ok(SteadyState {
        rho,
        residual,
        min_eigenvalue,
    })
}

fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn inverse_iteration(l: &Liouvillian) -> Result<SteadyState> {
    ensure_sequential_backend();
    let n = l.dim_n();
    let dim = n * n;
    let sigma = C64::from(1e-8 * l.params().gamma1);

    let mut triplets: Vec<(usize, usize, C64)> = l.superop().matrix().triplets().collect();
    for i in 0..dim {
        triplets.push((i, i, -sigma));
    }
    let shifted = CscMatrix::from_triplets(dim, &triplets);
    let mat = to_faer(&shifted)?;
    let lu = mat.sp_lu().map_err(|e| Error::SolverFailure {
        context: format!("shifted LU: {e:?}"),
        residual: f64::NAN,
    })?;

    let solve_vec = |x: &[C64]| -> Vec<C64> {
        let mut rhs = faer::Mat::<C64>::zeros(dim, 1);
        for i in 0..dim {
            rhs[(i, 0)] = x[i];
        }
        let y = lu.solve(&rhs);
        (0..dim).map(|i| y[(i, 0)]).collect()
    };

    // start from the maximally mixed state
    let mut x: Vec<C64> = vec![C64::from(0.0); dim];
    for j in 0..n {
        x[j * n + j] = C64::from(1.0 / n as f64);
    }
    let mut residual = f64::INFINITY;
    let mut work = vec![C64::from(0.0); dim];
    for _ in 0..64 {
        let y = solve_vec(&x);
        let nrm = norm2(&y);
        if !nrm.is_finite() || nrm == 0.0 {
            return Err(Error::SolverFailure {
                context: "inverse iteration diverged".into(),
                residual,
            });
        }
        for i in 0..dim {
            x[i] = y[i] / nrm;
        }
        l.superop().matrix().matvec(&x, &mut work);
        residual = norm2(&work);
        if residual <= 1e-13 * l.params().gamma1 {
            break;
        }
    }

    // probe for a second null vector (degenerate steady state)
    let gap_tol = 1e-6 * l.params().gamma1;
    let mut z: Vec<C64> = vec![C64::from(0.0); dim];
    for j in 0..n {
        z[j * n + j] = C64::from(if j % 2 == 0 { 1.0 } else { -1.0 });
    }
    deflate(&mut z, &x);
    if norm2(&z) > 1e-12 {
        for _ in 0..32 {
            let mut y = solve_vec(&z);
            deflate(&mut y, &x);
            let nrm = norm2(&y);
            if !nrm.is_finite() || nrm == 0.0 {
                break;
            }
            for i in 0..dim {
                z[i] = y[i] / nrm;
            }
        }
        l.superop().matrix().matvec(&z, &mut work);
        if norm2(&work) <= gap_tol {
            return Err(Error::DegenerateSteadyState);
        }
    }

    if residual > 1e-10 {
        return Err(Error::SolverFailure {
            context: "inverse iteration residual".into(),
            residual,
        });
    }
    finalize(&x, l)
}

fn deflate(z: &mut [C64], onto: &[C64]) {
    let overlap: C64 = onto.iter().zip(z.iter()).map(|(a, b)| a.conj() * *b).sum();
    let nrm2: f64 = onto.iter().map(|a| a.norm_sqr()).sum();
    if nrm2 > 0.0 {
        let coef = overlap / nrm2;
        for (zi, oi) in z.iter_mut().zip(onto.iter()) {
            *zi -= coef * *oi;
        }
    }
}

/// Result of the automatic cutoff search.
#[derive(Debug, Clone)]
pub struct ConvergedSteadyState {
    pub state: SteadyState,
    pub spec: HilbertSpec,
    /// Cutoffs visited by the doubling schedule.
    pub schedule: Vec<usize>,
}

/// Find the smallest cutoff in a doubling schedule whose steady state has a
/// tail population below `tail_tol` and whose `n_bar` and `Q_M` agree with the
/// next cutoff to within `obs_tol`.
pub fn auto_cutoff(params: &SystemParams, policy: &CutoffPolicy) -> Result<ConvergedSteadyState> {
    if policy.tail_tol.is_nan() || policy.tail_tol <= 0.0 || policy.tail_tol > 1.0 {
        return Err(Error::InvalidParams(format!(
            "tail_tol must be in (0, 1], got {}",
            policy.tail_tol
        )));
    }
    if policy.obs_tol.is_nan() || policy.obs_tol <= 0.0 || policy.obs_tol > 1.0 {
        return Err(Error::InvalidParams(format!(
            "obs_tol must be in (0, 1], got {}",
            policy.obs_tol
        )));
    }
    if policy.start < 2 || policy.ceiling < policy.start {
        return Err(Error::InvalidParams(
            "cutoff schedule must satisfy 2 <= start <= ceiling".into(),
        ));
    }

    let mut schedule = Vec::new();
    let mut prev: Option<(SteadyState, HilbertSpec, f64, f64)> = None;
    let mut cutoff = policy.start;
    let mut last_tail = f64::NAN;
    while cutoff <= policy.ceiling {
        let spec = HilbertSpec::new(cutoff)?;
        schedule.push(cutoff);
        let state = solve_at(params, spec)?;
        let n_bar = state.rho.mean_occupation();
        let q = mandel_q(&state.rho).unwrap_or(f64::NAN);
        last_tail = state.rho.tail_population();

        if let Some((prev_state, prev_spec, prev_n, prev_q)) = prev.take() {
            let tail_ok = prev_state.rho.tail_population() <= policy.tail_tol;
            let n_ok = (n_bar - prev_n).abs() <= policy.obs_tol * prev_n.abs().max(1.0);
            let q_ok = if prev_q.is_nan() || q.is_nan() {
                true
            } else {
                (q - prev_q).abs() <= policy.obs_tol * prev_q.abs().max(1.0)
            };
            if tail_ok && n_ok && q_ok {
                return Ok(ConvergedSteadyState {
                    state: prev_state,
                    spec: prev_spec,
                    schedule,
                });
            }
        }
        prev = Some((state, spec, n_bar, q));
        cutoff *= 2;
    }
    Err(Error::CutoffCeiling {
        ceiling: policy.ceiling,
        tail: last_tail,
    })
}
