//! Synchronization observables: photon statistics, phase distribution,
//! Wigner function, and the steady-state power spectrum.

pub mod spectrum;
pub mod wigner;

pub use spectrum::{
    fwhm, observed_frequency, power_spectrum, resolvent_spectrum_at, SpectrumResult,
    SpectrumSettings,
};
pub use wigner::{displaced_parity, wigner, wigner_strict, PhaseSpaceGrid, WignerField};

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;

/// Mandel Q parameter `(<n^2> - <n>^2 - <n>) / <n>`.
///
/// Negative values witness sub-Poissonian (nonclassical) photon statistics.
pub fn mandel_q(rho: &DensityMatrix) -> Result<f64> {
    let diag = rho.matrix().diag();
    let mut n_bar = 0.0;
    let mut n2 = 0.0;
    for (k, p) in diag.iter().enumerate() {
        n_bar += k as f64 * p.re;
        n2 += (k as f64) * (k as f64) * p.re;
    }
    if n_bar <= 1e-12 {
        return Err(Error::UndefinedObservable(
            "Mandel Q undefined at n_bar = 0 (vacuum)".into(),
        ));
    }
    Ok((n2 - n_bar * n_bar - n_bar) / n_bar)
}

/// Phase distribution `P(phi) = <phi|rho|phi> / 2pi` with phase states
/// `|phi> = sum_n e^{i n phi} |n>`, i.e.
/// `P(phi) = (1/2pi) sum_{n,m} e^{-i(n-m)phi} rho_{nm}`, on a uniform grid
/// over `[0, 2pi)`.  With this sign the peaks of `P` sit at the same angles
/// as the Wigner-function lobes and the classical lock phases.
#[derive(Debug, Clone)]
pub struct PhaseDistribution {
    pub phi: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn phase_distribution(rho: &DensityMatrix, resolution: usize) -> Result<PhaseDistribution> {
    if resolution < 64 {
        return Err(Error::InvalidParams(format!(
            "phase resolution must be >= 64, got {resolution}"
        )));
    }
    let n = rho.dim();
    let m = rho.matrix();
    // P(phi) = (1/2pi) [sum_n rho_nn + 2 Re sum_{d>=1} e^{-i d phi} sum_n rho_{n+d,n}]
    let coefs: Vec<C64> = (0..n)
        .map(|d| (d..n).map(|row| m[(row, row - d)]).sum())
        .collect();
    let mut phi = Vec::with_capacity(resolution);
    let mut values = Vec::with_capacity(resolution);
    for k in 0..resolution {
        let angle = TAU * k as f64 / resolution as f64;
        let mut acc = coefs[0];
        for (d, &coef) in coefs.iter().enumerate().skip(1) {
            let term = coef * C64::from_polar(1.0, -angle * d as f64);
            acc += term + term.conj();
        }
        phi.push(angle);
        values.push(acc.re / TAU);
    }
    Ok(PhaseDistribution { phi, values })
}

impl PhaseDistribution {
    /// Trapezoid integral over the full period (periodic closure).
    pub fn integral(&self) -> f64 {
        let dphi = TAU / self.values.len() as f64;
        self.values.iter().sum::<f64>() * dphi
    }

    /// Peak-to-trough spread relative to the mean.
    pub fn flatness(&self) -> f64 {
        let max = self.values.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.values.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    }

    /// Indices of local maxima on the periodic grid, ignoring fluctuations
    /// smaller than `prominence_rel` of the peak-to-trough range (an exactly
    /// flat distribution has no maxima).
    pub fn local_maxima(&self, prominence_rel: f64) -> Vec<usize> {
        let v = &self.values;
        let n = v.len();
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        let range = max - min;
        if range <= 1e-9 * max.abs().max(1e-300) {
            return Vec::new();
        }
        let threshold = min + prominence_rel * range;
        let mut out = Vec::new();
        for i in 0..n {
            let prev = v[(i + n - 1) % n];
            let next = v[(i + 1) % n];
            if v[i] > prev && v[i] >= next && v[i] > threshold {
                out.push(i);
            }
        }
        out
    }

    /// Values at the local maxima, descending.
    pub fn peak_values(&self, prominence_rel: f64) -> Vec<f64> {
        let mut peaks: Vec<f64> = self
            .local_maxima(prominence_rel)
            .iter()
            .map(|&i| self.values[i])
            .collect();
        peaks.sort_by(|a, b| b.partial_cmp(a).unwrap());
        peaks
    }
}
