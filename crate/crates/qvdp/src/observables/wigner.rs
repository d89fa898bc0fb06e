//! Wigner function on a rectangular phase-space grid.
//!
//! The primary evaluation is a Laguerre-polynomial series in the Fock basis,
//! summed per diagonal offset with the Clenshaw recurrence.  Normalization is
//! `integral of W over the complex plane = 1`.  Every field evaluation is
//! spot-validated at ten fixed pseudo-random points against an independent
//! displaced-parity computation (matrix exponential in an enlarged space).

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::tol;

/// Rectangular grid over `alpha = x + i y`.
#[derive(Debug, Clone)]
pub struct PhaseSpaceGrid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PhaseSpaceGrid {
    /// Uniform grid on `[-extent, extent]^2` with `n` points per axis.
    pub fn symmetric(extent: f64, n: usize) -> Result<Self> {
        if extent.is_nan() || extent <= 0.0 || n < 2 {
            return Err(Error::InvalidParams(
                "grid needs extent > 0 and n >= 2".into(),
            ));
        }
        let axis: Vec<f64> = (0..n)
            .map(|k| -extent + 2.0 * extent * k as f64 / (n - 1) as f64)
            .collect();
        Ok(Self {
            x: axis.clone(),
            y: axis,
        })
    }

    /// Default grid covering the support of `rho`: `|alpha| <= 1 + 3 sqrt(n_bar + 1)`.
    pub fn default_for(rho: &DensityMatrix) -> Self {
        let extent = 1.0 + 3.0 * (rho.mean_occupation() + 1.0).sqrt();
        Self::symmetric(extent, 101).expect("valid default grid")
    }

    pub fn extent(&self) -> f64 {
        let xm = self.x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let ym = self.y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        xm.max(ym)
    }
}

/// Wigner field sampled on a [`PhaseSpaceGrid`]; `values[(i, j)]` is
/// `W(x[i] + i y[j])`.
#[derive(Debug, Clone)]
pub struct WignerField {
    pub grid: PhaseSpaceGrid,
    pub values: Array2<f64>,
    /// Trapezoid integral of the field over the grid.
    pub normalization: f64,
}

impl WignerField {
    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::MAX, f64::min)
    }

    /// Max-norm asymmetry under `Im(alpha) -> -Im(alpha)` (requires a grid
    /// symmetric in `y`).
    pub fn mirror_asymmetry_im(&self) -> f64 {
        let ny = self.grid.y.len();
        let mut worst: f64 = 0.0;
        for i in 0..self.grid.x.len() {
            for j in 0..ny {
                worst = worst.max((self.values[(i, j)] - self.values[(i, ny - 1 - j)]).abs());
            }
        }
        worst
    }
}

/// Evaluate the Wigner function of `rho` at a single point via the Laguerre
/// series.
pub fn wigner_at(rho: &DensityMatrix, alpha: C64) -> f64 {
    wigner_point(rho.matrix(), alpha)
}

fn wigner_point(m: &Array2<C64>, alpha: C64) -> f64 {
    let n = m.nrows();
    let x = 4.0 * alpha.norm_sqr();
    let two_alpha = 2.0 * alpha;

    // diagonal offset d = 0
    let coeffs: Vec<C64> = (0..n)
        .map(|k| m[(k, k)] * if k % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let mut total = clenshaw_laguerre(&coeffs, 0.0, x);

    // offsets d >= 1: 2 Re[(2 alpha)^d / sqrt(d!) * sum_n c_n L_n^{(d)}(x)]
    let mut s_d = C64::from(1.0); // (2 alpha)^d / sqrt(d!)
    for d in 1..n {
        s_d = s_d * two_alpha / C64::from((d as f64).sqrt());
        let mut t = 1.0; // sqrt(d! n! / (n+d)!), n = 0 term
        let coeffs: Vec<C64> = (0..n - d)
            .map(|k| {
                if k > 0 {
                    t *= (k as f64 / (k + d) as f64).sqrt();
                }
                m[(k, k + d)] * t * if k % 2 == 0 { 1.0 } else { -1.0 }
            })
            .collect();
        let inner = clenshaw_laguerre(&coeffs, d as f64, x);
        let term = s_d * inner;
        total += term + term.conj();
    }
    std::f64::consts::FRAC_2_PI * (-x / 2.0).exp() * total.re
}

/// Clenshaw summation of `sum_k c_k L_k^{(a)}(x)` for associated Laguerre
/// polynomials.
fn clenshaw_laguerre(coeffs: &[C64], a: f64, x: f64) -> C64 {
    // recurrence: L_{k+1} = A_k L_k + B_k L_{k-1},
    // A_k = (2k + a + 1 - x) / (k + 1), B_k = -(k + a) / (k + 1)
    let mut b1 = C64::from(0.0);
    let mut b2 = C64::from(0.0);
    for k in (0..coeffs.len()).rev() {
        let kf = k as f64;
        let a_k = (2.0 * kf + a + 1.0 - x) / (kf + 1.0);
        let b_k1 = -((kf + 1.0) + a) / (kf + 2.0);
        let b0 = coeffs[k] + a_k * b1 + b_k1 * b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// Independent Wigner evaluation `W(alpha) = (2/pi) Tr[rho D(2 alpha) Pi]`
/// with the displacement operator built by matrix exponential in an enlarged
/// Fock space (so that truncation does not touch the displaced support).
pub fn displaced_parity(rho: &DensityMatrix, alpha: C64) -> f64 {
    let n = rho.dim();
    let beta = 2.0 * alpha;
    let pad = (beta.norm_sqr() + 10.0 * beta.norm()).ceil() as usize + 10;
    let big = n + pad;

    // generator beta b^dag - conj(beta) b in the enlarged space
    let mut gen = Array2::zeros((big, big));
    for k in 1..big {
        let s = (k as f64).sqrt();
        gen[(k, k - 1)] = beta * s; // b^dag
        gen[(k - 1, k)] = -beta.conj() * s; // -conj(beta) b
    }
    let d = crate::linalg::expm(&gen);

    let m = rho.matrix();
    let mut acc = C64::from(0.0);
    for row in 0..n {
        for col in 0..n {
            let parity = if row % 2 == 0 { 1.0 } else { -1.0 };
            acc += m[(row, col)] * d[(col, row)] * parity;
        }
    }
    std::f64::consts::FRAC_2_PI * acc.re
}

/// Spectrum of deterministic spot-check points (splitmix64 stream).
fn spot_points(extent: f64) -> Vec<C64> {
    let mut state: u64 = 0x9e3779b97f4a7c15;
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        (z ^ (z >> 31)) as f64 / u64::MAX as f64
    };
    let r_max = extent.min(2.2);
    (0..10)
        .map(|_| {
            let r = r_max * next().sqrt();
            let angle = std::f64::consts::TAU * next();
            C64::from_polar(r, angle)
        })
        .collect()
}

/// Compute the Wigner field on `grid`.
///
/// The returned `normalization` is the trapezoid integral over the grid; in
/// non-strict mode it is reported, in [`wigner_strict`] a deviation beyond
/// the tolerance is an error.
pub fn wigner(rho: &DensityMatrix, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    if grid.x.len() < 2 || grid.y.len() < 2 {
        return Err(Error::InvalidParams(
            "Wigner grid needs at least 2 points per axis".into(),
        ));
    }
    let m = rho.matrix();
    let mut values = Array2::zeros((grid.x.len(), grid.y.len()));
    for (i, &x) in grid.x.iter().enumerate() {
        for (j, &y) in grid.y.iter().enumerate() {
            values[(i, j)] = wigner_point(m, C64::new(x, y));
        }
    }

    for alpha in spot_points(grid.extent()) {
        let series = wigner_point(m, alpha);
        let parity = displaced_parity(rho, alpha);
        if (series - parity).abs() > tol::WIGNER_SPOT_CHECK {
            return Err(Error::CrossValidation(format!(
                "Wigner series {series:.3e} vs displaced parity {parity:.3e} at alpha = {alpha}"
            )));
        }
    }

    let normalization = trapezoid_2d(&grid.x, &grid.y, &values);
    Ok(WignerField {
        grid: grid.clone(),
        values,
        normalization,
    })
}

/// Like [`wigner`], but a normalization defect beyond the tolerance (grid too
/// coarse or too small) is escalated to an error.
pub fn wigner_strict(rho: &DensityMatrix, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    let field = wigner(rho, grid)?;
    let defect = (field.normalization - 1.0).abs();
    if defect > tol::WIGNER_NORMALIZATION {
        return Err(Error::Accuracy(format!(
            "Wigner normalization misses 1 by {defect:.3e} (grid too coarse or too small)"
        )));
    }
    Ok(field)
}

fn trapezoid_2d(x: &[f64], y: &[f64], values: &Array2<f64>) -> f64 {
    let wx = trapezoid_weights(x);
    let wy = trapezoid_weights(y);
    let mut acc = 0.0;
    for i in 0..x.len() {
        for j in 0..y.len() {
            acc += wx[i] * wy[j] * values[(i, j)];
        }
    }
    acc
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = axis[i + 1] - axis[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, fock_state, HilbertSpec};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_2_PI;

    fn spec(n: usize) -> HilbertSpec {
        HilbertSpec::new(n).unwrap()
    }

    #[test]
    fn vacuum_wigner_is_gaussian() {
        let vac = fock_state(0, spec(12)).unwrap();
        assert_relative_eq!(wigner_at(&vac, C64::from(0.0)), FRAC_2_PI, epsilon = 1e-12);
        let a = C64::new(0.7, -0.4);
        assert_relative_eq!(
            wigner_at(&vac, a),
            FRAC_2_PI * (-2.0 * a.norm_sqr()).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn fock_one_wigner_negative_at_origin() {
        let one = fock_state(1, spec(12)).unwrap();
        assert_relative_eq!(wigner_at(&one, C64::from(0.0)), -FRAC_2_PI, epsilon = 1e-12);
    }

    #[test]
    fn coherent_wigner_is_displaced_gaussian() {
        let alpha0 = C64::new(0.9, 0.5);
        let rho = coherent_state(alpha0, spec(40)).unwrap();
        for point in [alpha0, C64::from(0.0), C64::new(1.3, -0.2)] {
            let expect = FRAC_2_PI * (-2.0 * (point - alpha0).norm_sqr()).exp();
            assert_relative_eq!(wigner_at(&rho, point), expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn series_matches_displaced_parity() {
        let rho = coherent_state(C64::new(0.4, -0.8), spec(24)).unwrap();
        for alpha in [C64::new(0.3, 0.2), C64::new(-1.1, 0.7), C64::new(0.0, -1.4)] {
            let s = wigner_at(&rho, alpha);
            let p = displaced_parity(&rho, alpha);
            assert!((s - p).abs() < 1e-10, "series {s} parity {p}");
        }
    }

    #[test]
    fn vacuum_field_normalized() {
        let vac = fock_state(0, spec(8)).unwrap();
        let grid = PhaseSpaceGrid::symmetric(4.0, 101).unwrap();
        let field = wigner_strict(&vac, &grid).unwrap();
        assert!((field.normalization - 1.0).abs() < 1e-6);
        assert!(field.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn too_small_grid_fails_strict_mode() {
        let vac = fock_state(0, spec(8)).unwrap();
        let grid = PhaseSpaceGrid::symmetric(0.8, 41).unwrap();
        assert!(matches!(
            wigner_strict(&vac, &grid),
            Err(Error::Accuracy(_))
        ));
    }
}
