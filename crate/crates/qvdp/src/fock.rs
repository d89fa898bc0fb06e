//! Truncated Fock-space operator algebra.
//!
//! Operators and states live on the number basis `|0> ... |N-1>` of a
//! [`HilbertSpec`] with cutoff dimension `N`.  Operators are stored densely;
//! only superoperators (see [`crate::liouvillian`]) are sparse.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{dagger, hermiticity_error};
use crate::params::SystemParams;
use crate::tol;

/// Descriptor of the truncated Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpec {
    cutoff: usize,
}

impl HilbertSpec {
    /// `cutoff` is the dimension of the truncated space; must be at least 2.
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::InvalidParams(format!(
                "Fock cutoff must be >= 2, got {cutoff}"
            )));
        }
        Ok(Self { cutoff })
    }

    /// Dimension N of the truncated space.
    pub fn dim(&self) -> usize {
        self.cutoff
    }
}

/// Dense operator on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumOperator {
    matrix: Array2<C64>,
}

impl QuantumOperator {
    /// Wrap a square matrix.
    pub fn from_matrix(matrix: Array2<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            matrix: dagger(&self.matrix),
        }
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Self {
            matrix: self.matrix.dot(&other.matrix),
        })
    }

    /// Max-norm deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }
}

/// Annihilation operator `b`: `<n-1|b|n> = sqrt(n)`.
pub fn annihilation(spec: HilbertSpec) -> QuantumOperator {
    let n = spec.dim();
    let mut m = Array2::zeros((n, n));
    for k in 1..n {
        m[(k - 1, k)] = C64::from((k as f64).sqrt());
    }
    QuantumOperator { matrix: m }
}

/// Creation operator `b^dag`.
pub fn creation(spec: HilbertSpec) -> QuantumOperator {
    annihilation(spec).dagger()
}

/// Number operator `n = b^dag b`.
pub fn number(spec: HilbertSpec) -> QuantumOperator {
    let n = spec.dim();
    let mut m = Array2::zeros((n, n));
    for k in 0..n {
        m[(k, k)] = C64::from(k as f64);
    }
    QuantumOperator { matrix: m }
}

/// Identity operator.
pub fn identity(spec: HilbertSpec) -> QuantumOperator {
    QuantumOperator {
        matrix: Array2::from_diag_elem(spec.dim(), C64::from(1.0)),
    }
}

/// Rotating-frame Hamiltonian
/// `H = delta b^dag b + i F (b - b^dag) + i eta (b^2 e^{-i theta} - b^dag^2 e^{i theta})`,
/// in units of `gamma1`.  Hermitian by construction.
pub fn build_hamiltonian(params: &SystemParams, spec: HilbertSpec) -> QuantumOperator {
    let b = annihilation(spec);
    let bd = b.dagger();
    let i = C64::i();

    let b2 = b.matrix.dot(&b.matrix);
    let bd2 = bd.matrix.dot(&bd.matrix);

    let mut h = number(spec).matrix * C64::from(params.delta);
    h = h + (&b.matrix - &bd.matrix) * (i * params.force);
    let phase = C64::from_polar(1.0, -params.theta);
    h = h + (b2 * phase - bd2 * phase.conj()) * (i * params.eta);
    QuantumOperator { matrix: h }
}

/// Fock projector `|n><n|` as a density matrix.
pub fn fock_state(n: usize, spec: HilbertSpec) -> Result<DensityMatrix> {
    if n >= spec.dim() {
        return Err(Error::IndexOutOfRange {
            index: n,
            cutoff: spec.dim(),
        });
    }
    let mut m = Array2::zeros((spec.dim(), spec.dim()));
    m[(n, n)] = C64::from(1.0);
    DensityMatrix::try_new(m)
}

/// Truncated coherent state `|alpha><alpha|`, renormalized so the trace is
/// exactly 1 on the truncated space.
pub fn coherent_state(alpha: C64, spec: HilbertSpec) -> Result<DensityMatrix> {
    let n = spec.dim();
    let mut amp = vec![C64::from(0.0); n];
    amp[0] = C64::from(1.0);
    for k in 1..n {
        amp[k] = amp[k - 1] * alpha / C64::from((k as f64).sqrt());
    }
    let norm: f64 = amp.iter().map(|a| a.norm_sqr()).sum();
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = amp[i] * amp[j].conj() / norm;
        }
    }
    DensityMatrix::try_new(m)
}

/// Truncated thermal state with mean occupation `n_bar`, renormalized.
pub fn thermal_state(n_bar: f64, spec: HilbertSpec) -> Result<DensityMatrix> {
    if n_bar < 0.0 || !n_bar.is_finite() {
        return Err(Error::InvalidParams(format!(
            "thermal n_bar must be >= 0, got {n_bar}"
        )));
    }
    let n = spec.dim();
    let ratio = n_bar / (1.0 + n_bar);
    let mut p = vec![0.0; n];
    p[0] = 1.0;
    for k in 1..n {
        p[k] = p[k - 1] * ratio;
    }
    let norm: f64 = p.iter().sum();
    let mut m = Array2::zeros((n, n));
    for k in 0..n {
        m[(k, k)] = C64::from(p[k] / norm);
    }
    DensityMatrix::try_new(m)
}

/// Expectation value `Tr(op rho)`.
pub fn expectation(op: &QuantumOperator, rho: &DensityMatrix) -> Result<C64> {
    if op.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: op.dim(),
        });
    }
    let m = op.matrix();
    let r = rho.matrix();
    let n = op.dim();
    let mut acc = C64::from(0.0);
    for i in 0..n {
        for j in 0..n {
            acc += m[(i, j)] * r[(j, i)];
        }
    }
    Ok(acc)
}

/// Density matrix on the truncated space.
///
/// Construction checks Hermiticity and unit trace; positivity is checked
/// explicitly by the steady-state solver (see [`DensityMatrix::min_eigenvalue`])
/// rather than on every construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: Array2<C64>,
}

impl DensityMatrix {
    pub fn try_new(matrix: Array2<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let herm = hermiticity_error(&matrix);
        if herm.is_nan() || herm > tol::HERMITICITY {
            return Err(Error::UnphysicalState(format!(
                "Hermiticity violation {herm:.3e}"
            )));
        }
        let tr: C64 = matrix.diag().iter().sum();
        let tr_err = (tr - C64::from(1.0)).norm();
        if tr_err.is_nan() || tr_err > tol::TRACE {
            return Err(Error::UnphysicalState(format!(
                "trace deviates from 1 by {tr_err:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    /// Population of Fock level `n`.
    pub fn population(&self, n: usize) -> f64 {
        self.matrix[(n, n)].re
    }

    /// Population of the top Fock level (the truncation-tail certificate).
    pub fn tail_population(&self) -> f64 {
        self.population(self.dim() - 1)
    }

    /// Mean photon number.
    pub fn mean_occupation(&self) -> f64 {
        self.matrix
            .diag()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p.re)
            .sum()
    }

    /// Smallest eigenvalue (dense Hermitian eigensolve).
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eigs = crate::linalg::hermitian_eigenvalues(&self.matrix)?;
        Ok(eigs[0])
    }
}
