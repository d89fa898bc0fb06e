//! Sparse superoperator assembly for the master equation
//! `rho_dot = -i[H, rho] + gamma1 D[b^dag] rho + gamma2 D[b^2] rho`.
//!
//! # Vectorization convention
//!
//! Density matrices are vectorized by column stacking: entry `(i, j)` of an
//! `N x N` matrix maps to index `i + j * N`.  Under this convention
//! `A rho B -> (B^T kron A) vec(rho)`, which is used for every term below.
//! This convention is fixed here and used everywhere in the crate.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{
    annihilation, build_hamiltonian, creation, DensityMatrix, HilbertSpec, QuantumOperator,
};
use crate::params::SystemParams;
use crate::sparse::CscMatrix;

/// Column-stacking vectorization.
pub fn vectorize(m: &Array2<C64>) -> Vec<C64> {
    let n = m.nrows();
    let mut v = vec![C64::from(0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            v[i + j * n] = m[(i, j)];
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &[C64], n: usize) -> Array2<C64> {
    let mut m = Array2::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] = v[i + j * n];
        }
    }
    m
}

/// Accumulates superoperator terms as triplets, then compresses.
pub struct SuperopBuilder {
    dim_n: usize,
    triplets: Vec<(usize, usize, C64)>,
}

impl SuperopBuilder {
    pub fn new(spec: HilbertSpec) -> Self {
        Self {
            dim_n: spec.dim(),
            triplets: Vec::new(),
        }
    }

    fn nonzeros(m: &Array2<C64>) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        for ((i, j), &v) in m.indexed_iter() {
            if v != C64::from(0.0) {
                out.push((i, j, v));
            }
        }
        out
    }

    /// Add `coeff * (A rho B)`, i.e. `coeff * (B^T kron A)`.
    pub fn add_left_right(&mut self, a: &Array2<C64>, b: &Array2<C64>, coeff: C64) -> &mut Self {
        let n = self.dim_n;
        let a_nz = Self::nonzeros(a);
        let b_nz = Self::nonzeros(b);
        for &(i, k, av) in &a_nz {
            for &(l, j, bv) in &b_nz {
                // (A rho B)_{ij} collects rho_{kl}: row i + j*N, col k + l*N
                self.triplets.push((i + j * n, k + l * n, coeff * av * bv));
            }
        }
        self
    }

    /// Add `coeff * (A rho)`.
    pub fn add_left(&mut self, a: &Array2<C64>, coeff: C64) -> &mut Self {
        let n = self.dim_n;
        for (i, k, av) in Self::nonzeros(a) {
            for j in 0..n {
                self.triplets.push((i + j * n, k + j * n, coeff * av));
            }
        }
        self
    }

    /// Add `coeff * (rho B)`.
    pub fn add_right(&mut self, b: &Array2<C64>, coeff: C64) -> &mut Self {
        let n = self.dim_n;
        for (l, j, bv) in Self::nonzeros(b) {
            for i in 0..n {
                self.triplets.push((i + j * n, i + l * n, coeff * bv));
            }
        }
        self
    }

    /// Add the commutator part `-i [H, rho]`.
    pub fn add_hamiltonian(&mut self, h: &QuantumOperator) -> &mut Self {
        self.add_left(h.matrix(), -C64::i());
        self.add_right(h.matrix(), C64::i());
        self
    }

    /// Add `rate * D[O] rho = rate * (O rho O^dag - {O^dag O, rho} / 2)`.
    pub fn add_dissipator(&mut self, op: &QuantumOperator, rate: f64) -> &mut Self {
        let o = op.matrix();
        let od = crate::linalg::dagger(o);
        let odo = od.dot(o);
        self.add_left_right(o, &od, C64::from(rate));
        self.add_left(&odo, C64::from(-0.5 * rate));
        self.add_right(&odo, C64::from(-0.5 * rate));
        self
    }

    pub fn build(&self) -> Superoperator {
        let dim = self.dim_n * self.dim_n;
        Superoperator {
            dim_n: self.dim_n,
            matrix: CscMatrix::from_triplets(dim, &self.triplets),
        }
    }
}

/// Sparse linear map on vectorized density matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dim_n: usize,
    matrix: CscMatrix,
}

impl Superoperator {
    /// Hilbert-space dimension N (the matrix itself is N^2 x N^2).
    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CscMatrix {
        &self.matrix
    }

    /// Apply to a general (not necessarily Hermitian) matrix.
    pub fn apply_matrix(&self, m: &Array2<C64>) -> Result<Array2<C64>> {
        if m.nrows() != self.dim_n || m.ncols() != self.dim_n {
            return Err(Error::DimensionMismatch {
                expected: self.dim_n,
                got: m.nrows(),
            });
        }
        let x = vectorize(m);
        let mut y = vec![C64::from(0.0); x.len()];
        self.matrix.matvec(&x, &mut y);
        Ok(unvectorize(&y, self.dim_n))
    }

    /// Entrywise 1-norm of `L vec(rho)`.
    pub fn residual_one_norm(&self, rho: &DensityMatrix) -> f64 {
        self.matrix.residual_one_norm(&vectorize(rho.matrix()))
    }
}

/// The dissipator `D[O]` as a standalone superoperator term.
pub fn dissipator(op: &QuantumOperator) -> Superoperator {
    let spec = HilbertSpec::new(op.dim()).expect("operator dimension >= 2");
    let mut b = SuperopBuilder::new(spec);
    b.add_dissipator(op, 1.0);
    b.build()
}

/// Full generator of the master equation.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    superop: Superoperator,
    params: SystemParams,
    spec: HilbertSpec,
}

impl Liouvillian {
    /// Wrap a custom generator (e.g. a single dissipator term) so it can be
    /// fed to the steady-state and dynamics machinery.
    pub fn from_parts(superop: Superoperator, params: SystemParams, spec: HilbertSpec) -> Self {
        assert_eq!(
            superop.dim_n(),
            spec.dim(),
            "superoperator dimension must match spec"
        );
        Self {
            superop,
            params,
            spec,
        }
    }

    pub fn superop(&self) -> &Superoperator {
        &self.superop
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn dim_n(&self) -> usize {
        self.spec.dim()
    }

    /// Time derivative `rho_dot = L(rho)`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<Array2<C64>> {
        self.superop.apply_matrix(rho.matrix())
    }

    /// Residual certificate for a candidate steady state.
    pub fn residual_one_norm(&self, rho: &DensityMatrix) -> f64 {
        self.superop.residual_one_norm(rho)
    }
}

/// Assemble `L = -i[H_tot, .] + gamma1 D[b^dag] + gamma2 D[b^2]`.
pub fn assemble(params: &SystemParams, spec: HilbertSpec) -> Liouvillian {
    let h = build_hamiltonian(params, spec);
    let b = annihilation(spec);
    let bd = creation(spec);
    let b2 = b.mul(&b).expect("same dimension");

    let mut builder = SuperopBuilder::new(spec);
    builder
        .add_hamiltonian(&h)
        .add_dissipator(&bd, params.gamma1)
        .add_dissipator(&b2, params.gamma2);
    Liouvillian {
        superop: builder.build(),
        params: *params,
        spec,
    }
}
