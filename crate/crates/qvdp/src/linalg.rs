//! Dense complex linear algebra helpers.
//!
//! Decompositions are delegated to `faer`; everything here operates on
//! `ndarray` matrices, which is the representation used by the rest of the
//! crate.

use faer::Mat;
use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Conjugate transpose.
pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// Matrix trace.
pub fn trace(m: &Array2<C64>) -> C64 {
    m.diag().iter().sum()
}

/// Largest entry magnitude.
pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max-norm of `m - m^dag`.
pub fn hermiticity_error(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    err
}

fn to_faer(m: &Array2<C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Result<Vec<f64>> {
    let evd = to_faer(m)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::SolverFailure {
            context: format!("hermitian eigensolver: {e:?}"),
            residual: f64::NAN,
        })?;
    let mut eigs: Vec<f64> = (0..m.nrows()).map(|i| evd.S()[i].re).collect();
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// Eigenvalues of a general complex matrix (no particular order).
pub fn complex_eigenvalues(m: &Array2<C64>) -> Result<Vec<C64>> {
    to_faer(m).eigenvalues().map_err(|e| Error::SolverFailure {
        context: format!("eigensolver: {e:?}"),
        residual: f64::NAN,
    })
}

/// Singular values, descending.
pub fn singular_values(m: &Array2<C64>) -> Result<Vec<f64>> {
    to_faer(m)
        .singular_values()
        .map_err(|e| Error::SolverFailure {
            context: format!("svd: {e:?}"),
            residual: f64::NAN,
        })
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
///
/// Accuracy is governed by scaling the 1-norm below 1/4 before the series;
/// adequate for the displacement operators and frame rotations used here.
pub fn expm(m: &Array2<C64>) -> Array2<C64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "expm: matrix must be square");
    let norm = one_norm(m);
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m.mapv(|z| z / C64::from(2f64.powi(squarings as i32)));

    let eye = Array2::from_diag_elem(n, C64::new(1.0, 0.0));
    let mut result = eye.clone();
    let mut term = eye;
    for k in 1..=20u64 {
        term = term.dot(&scaled) / C64::from(k as f64);
        result += &term;
        if max_abs(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

fn one_norm(m: &Array2<C64>) -> f64 {
    let mut best: f64 = 0.0;
    for col in m.columns() {
        best = best.max(col.iter().map(|z| z.norm()).sum());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn expm_matches_scalar_exponential() {
        let mut m = Array2::zeros((2, 2));
        m[(0, 0)] = C64::new(0.3, -1.2);
        m[(1, 1)] = C64::new(-2.0, 0.7);
        let e = expm(&m);
        assert_relative_eq!(
            e[(0, 0)].re,
            C64::new(0.3, -1.2).exp().re,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            e[(1, 1)].im,
            C64::new(-2.0, 0.7).exp().im,
            max_relative = 1e-13
        );
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn expm_rotation_is_unitary() {
        // exp of an anti-Hermitian matrix is unitary
        let mut m = Array2::zeros((3, 3));
        m[(0, 1)] = C64::new(0.0, 1.7);
        m[(1, 0)] = C64::new(0.0, 1.7);
        m[(1, 2)] = C64::new(2.3, 0.0);
        m[(2, 1)] = C64::new(-2.3, 0.0);
        let u = expm(&m);
        let udu = dagger(&u).dot(&u);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((udu[(i, j)] - C64::from(expect)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hermitian_eigenvalues_ascending() {
        let mut m = Array2::zeros((2, 2));
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(1, 1)] = C64::new(-1.0, 0.0);
        m[(0, 1)] = C64::new(0.0, 0.5);
        m[(1, 0)] = C64::new(0.0, -0.5);
        let eigs = hermitian_eigenvalues(&m).unwrap();
        let r = (1.25f64).sqrt();
        assert_relative_eq!(eigs[0], -r, epsilon = 1e-12);
        assert_relative_eq!(eigs[1], r, epsilon = 1e-12);
    }
}
