//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Criteria cover the steady-state certificates, the deep-quantum and
//! classical limits, the closed-form lock phase, the fixed-point counts of
//! the classical phase portraits, the Wigner/phase-distribution bifurcation
//! structure, the entrainment and FWHM trends, the Mandel-Q signs, the
//! dual-route spectrum validation, and byte-level output determinism.

use std::f64::consts::{PI, TAU};
use std::process::Command;

use num_complex::Complex64 as C64;
use rand::{rngs::StdRng, RngExt, SeedableRng};

use qvdp::classical::{
    fixed_points, integrate, squeezing_lock_phase, FixedPointSearch, PhasePoint,
};
use qvdp::dynamics::{correlation_bdag_b, CorrelationSeries, CorrelationSettings};
use qvdp::integrate::IntegratorSettings;
use qvdp::observables::{
    mandel_q, phase_distribution, power_spectrum, resolvent_spectrum_at, wigner_strict,
    PhaseSpaceGrid, SpectrumResult, SpectrumSettings,
};
use qvdp::steady_state::{auto_cutoff, ConvergedSteadyState, CutoffPolicy};
use qvdp::SystemParams;

fn params(delta: f64, force: f64, eta: f64, theta: f64, gamma2: f64) -> SystemParams {
    SystemParams::new(delta, force, eta, theta, 1.0, gamma2).unwrap()
}

fn steady(p: &SystemParams) -> ConvergedSteadyState {
    auto_cutoff(p, &CutoffPolicy::default()).unwrap()
}

fn spectrum_of(p: &SystemParams) -> (ConvergedSteadyState, CorrelationSeries, SpectrumResult) {
    let conv = steady(p);
    let l = qvdp::liouvillian::assemble(p, conv.spec);
    let g = correlation_bdag_b(&conv.state.rho, &l, &CorrelationSettings::default()).unwrap();
    let s = power_spectrum(&g, &SpectrumSettings::default()).unwrap();
    (conv, g, s)
}

#[test]
fn criterion_01_steady_state_certificates() {
    // 5x5 grid over (Delta, eta) in [0,1]^2 at gamma2 = 3, F = 0
    for i in 0..5 {
        for j in 0..5 {
            let delta = i as f64 * 0.25;
            let eta = j as f64 * 0.25;
            let p = params(delta, 0.0, eta, 0.0, 3.0);
            let conv = steady(&p);
            assert!(conv.state.residual <= 1e-10, "residual at ({delta},{eta})");
            let trace_err =
                (conv.state.rho.matrix().diag().iter().sum::<C64>() - C64::from(1.0)).norm();
            assert!(trace_err <= 1e-10, "trace at ({delta},{eta})");
            assert!(
                conv.state.min_eigenvalue >= -1e-10,
                "positivity at ({delta},{eta})"
            );
            assert!(
                conv.state.rho.tail_population() <= 1e-8,
                "tail at ({delta},{eta})"
            );
        }
    }
    println!("criterion 1 (steady-state certificate, 5x5 grid): PASS");
}

#[test]
fn criterion_02_deep_quantum_limit() {
    let p = params(0.0, 0.0, 0.0, 0.0, 1e4);
    let conv = steady(&p);
    let n_bar = conv.state.rho.mean_occupation();
    let p0 = conv.state.rho.population(0);

    // independent oracle: stationary point of the diagonal rate equations
    let oracle = rate_equation_oracle(1.0, 1e4, conv.spec.dim());
    let oracle_n: f64 = oracle.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    assert!((n_bar - oracle_n).abs() <= 1e-8);

    assert!((n_bar - 1.0 / 3.0).abs() <= 0.01 / 3.0, "n_bar = {n_bar}");
    assert!((p0 - 2.0 / 3.0).abs() <= 0.01 * 2.0 / 3.0, "p0 = {p0}");
    println!("criterion 2 (deep-quantum limit n_bar = 1/3, p0 = 2/3): PASS");
}

#[test]
fn criterion_03_classical_correspondence() {
    // gamma1/gamma2 = 20: n_bar within 15% of gamma1/(2 gamma2) = 10
    let p = params(0.0, 0.0, 0.0, 0.0, 0.05);
    let conv = steady(&p);
    let n_bar = conv.state.rho.mean_occupation();
    assert!((n_bar - 10.0).abs() <= 1.5, "n_bar = {n_bar}");
    println!("criterion 3 (classical limit n_bar ~ gamma1/2gamma2): PASS");
}

#[test]
fn criterion_04_lock_phase_reproduction() {
    let mut rng = StdRng::seed_from_u64(0x70c4);
    let settings = IntegratorSettings::classical();

    // 20 draws inside the tongue: integration converges to the closed form
    for draw in 0..20 {
        let delta =
            (0.2 + 0.8 * rng.random::<f64>()) * if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
        let theta = TAU * rng.random::<f64>();
        let eta = 0.5 * delta.abs() * (1.05 + 1.95 * rng.random::<f64>());
        let p = params(delta, 0.0, eta, theta, 3.0);
        let lock = squeezing_lock_phase(&p).unwrap();
        let start = PhasePoint::new(0.3 + rng.random::<f64>(), TAU * rng.random::<f64>()).unwrap();
        let traj = integrate(start, &p, 3000.0, &settings).unwrap();
        assert!(
            traj.converged,
            "draw {draw}: no convergence inside the tongue"
        );
        let end = traj.points.last().unwrap().phi;
        let dist = (end - lock.principal)
            .abs()
            .min((end - lock.companion).abs());
        assert!(
            dist <= 1e-6,
            "draw {draw}: locked at {end}, expected {lock:?}"
        );
    }

    // below the tongue: no convergence flag
    for draw in 0..20 {
        let delta =
            (0.2 + 0.8 * rng.random::<f64>()) * if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
        let theta = TAU * rng.random::<f64>();
        let eta = 0.5 * delta.abs() * 0.95 * (0.15 + 0.85 * rng.random::<f64>());
        let p = params(delta, 0.0, eta, theta, 3.0);
        let start = PhasePoint::new(0.3 + rng.random::<f64>(), TAU * rng.random::<f64>()).unwrap();
        let traj = integrate(start, &p, 120.0, &settings).unwrap();
        assert!(
            !traj.converged,
            "draw {draw}: spurious lock below the tongue"
        );
    }
    println!("criterion 4 (closed-form lock phase, 20 + 20 random draws): PASS");
}

#[test]
fn criterion_05_fixed_point_counts() {
    let search = FixedPointSearch::default();
    let counts: Vec<usize> = [0.0, 1.0, 1.5]
        .iter()
        .map(|&eta| {
            fixed_points(&params(1.0, 1.0, eta, PI / 4.0, 3.0), &search)
                .unwrap()
                .len()
        })
        .collect();
    assert_eq!(counts, vec![1, 1, 3]);

    let fps = fixed_points(&params(1.0, 1.0, 1.5, PI / 4.0, 3.0), &search).unwrap();
    let stable = fps.iter().filter(|fp| fp.stability.is_stable()).count();
    assert_eq!(stable, 2);
    assert_eq!(fps.len() - stable, 1);
    println!("criterion 5 (phase-portrait fixed-point counts 1/1/3, 2 stable + 1 unstable): PASS");
}

#[test]
fn criterion_06_wigner_bifurcation_structure() {
    // (a) undriven: rotationally symmetric ring, flat phase distribution
    let p = params(0.0, 0.0, 0.0, 0.0, 3.0);
    let conv = steady(&p);
    let dist = phase_distribution(&conv.state.rho, 2048).unwrap();
    assert!(dist.flatness() <= 1e-6, "flatness {}", dist.flatness());

    // (b) resonant squeezing: mirror symmetry about Im(alpha) = 0 and
    // exactly two phase-distribution maxima, separated by pi
    let p = params(0.0, 0.0, 1.0, 0.0, 3.0);
    let conv = steady(&p);
    let grid = PhaseSpaceGrid::default_for(&conv.state.rho);
    let field = wigner_strict(&conv.state.rho, &grid).unwrap();
    assert!(
        field.mirror_asymmetry_im() <= 1e-8,
        "asymmetry {}",
        field.mirror_asymmetry_im()
    );
    let dist = phase_distribution(&conv.state.rho, 2048).unwrap();
    let maxima = dist.local_maxima(1e-3);
    assert_eq!(maxima.len(), 2, "maxima at {maxima:?}");
    let sep = maxima[1] - maxima[0];
    assert!(
        (sep as i64 - 1024).unsigned_abs() <= 1,
        "separation {sep} bins"
    );

    // (i) driven + detuned + strong squeezing: one dominant lobe
    let p = params(1.0, 1.0, 3.0, 0.0, 3.0);
    let conv = steady(&p);
    let dist = phase_distribution(&conv.state.rho, 2048).unwrap();
    let peaks = dist.peak_values(1e-3);
    assert!(!peaks.is_empty());
    if peaks.len() > 1 {
        assert!(
            peaks[0] / peaks[1] > 1.01,
            "peak ratio {}",
            peaks[0] / peaks[1]
        );
    }
    println!("criterion 6 (Wigner/phase-distribution bifurcation structure): PASS");
}

#[test]
fn criterion_07_entrainment_and_fwhm_trends() {
    // sigma(eta) strictly decreasing at Delta = 0.3, gamma2 = 3
    let etas = [0.5, 1.0, 1.5, 2.0];
    let sigma_eta: Vec<f64> = etas
        .iter()
        .map(|&eta| spectrum_of(&params(0.3, 0.0, eta, 0.0, 3.0)).2.sigma_fwhm)
        .collect();
    for w in sigma_eta.windows(2) {
        assert!(w[1] < w[0], "sigma(eta) not decreasing: {sigma_eta:?}");
    }

    // sigma(F) strictly increasing
    let forces = [0.5, 1.0, 1.5, 2.0];
    let sigma_f: Vec<f64> = forces
        .iter()
        .map(|&f| spectrum_of(&params(0.3, f, 0.0, 0.0, 3.0)).2.sigma_fwhm)
        .collect();
    for w in sigma_f.windows(2) {
        assert!(w[1] > w[0], "sigma(F) not increasing: {sigma_f:?}");
    }

    // squeezing entrains, harmonic drive does not
    let w_eta = spectrum_of(&params(0.3, 0.0, 2.0, 0.0, 3.0)).2.omega_obs;
    let w_f = spectrum_of(&params(0.3, 2.0, 0.0, 0.0, 3.0)).2.omega_obs;
    assert!(
        w_eta.abs() < w_f.abs(),
        "|omega_obs|: eta {w_eta} vs F {w_f}"
    );

    println!(
        "criterion 7 (FWHM trends sigma(eta) down {sigma_eta:?}, sigma(F) up {sigma_f:?}; \
         |omega_obs| {:.4} < {:.4}): PASS",
        w_eta.abs(),
        w_f.abs()
    );
}

#[test]
fn criterion_08_mandel_q_signs() {
    // harmonic sweep F in (0, 2]: Q_M < 0 at every point
    for k in 1..=8 {
        let force = 0.25 * k as f64;
        let conv = steady(&params(0.3, force, 0.0, 0.0, 3.0));
        let q = mandel_q(&conv.state.rho).unwrap();
        assert!(q < 0.0, "Q = {q} at F = {force}");
    }

    // squeezing sweep eta in (0, 3]: at least one sign change
    let qs: Vec<f64> = (1..=12)
        .map(|k| {
            let eta = 0.25 * k as f64;
            mandel_q(&steady(&params(0.3, 0.0, eta, 0.0, 3.0)).state.rho).unwrap()
        })
        .collect();
    let sign_changes = qs
        .windows(2)
        .filter(|w| w[0].signum() != w[1].signum())
        .count();
    assert!(sign_changes >= 1, "no Q_M sign change along eta: {qs:?}");

    println!("criterion 8 (Mandel Q: negative along F sweep, sign change along eta sweep): PASS");
}

#[test]
fn criterion_09_spectrum_cross_validation() {
    // three parameter sets; the transform itself re-verifies against the
    // resolvent at five frequencies, and we re-check on grid points here
    let sets = [
        params(0.3, 0.0, 1.0, 0.0, 3.0),
        params(0.5, 0.0, 1.5, 0.0, 3.0),
        params(0.3, 1.0, 0.0, 0.0, 3.0),
    ];
    for p in &sets {
        let (conv, g, spec) = spectrum_of(p);
        let l = qvdp::liouvillian::assemble(p, conv.spec);
        let peak_idx = spec
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let mut checked = 0;
        for offset in [-60i64, -30, 15, 30, 60] {
            let idx = usize::try_from(peak_idx as i64 + offset).unwrap();
            let w = spec.omega[idx];
            if w.abs() < 0.05 {
                continue;
            }
            let s_res = resolvent_spectrum_at(&l, &conv.state.rho, w).unwrap();
            let rel = (spec.values[idx] - s_res).abs() / s_res.abs();
            assert!(rel <= 1e-6, "relative {rel:.2e} at omega {w}");
            checked += 1;
        }
        assert!(checked >= 4);

        // total power restores n_bar (coherent line included)
        assert!(
            (spec.total_power - g.n_bar).abs() <= 1e-4 * g.n_bar.max(1.0),
            "total {} vs n_bar {}",
            spec.total_power,
            g.n_bar
        );
    }

    // synthetic-Lorentzian extraction accuracy
    let dtau = 6.25e-4;
    let m = ((1e7f64.ln()) / 0.1 / dtau).ceil() as usize;
    let values: Vec<C64> = (0..=m)
        .map(|k| (C64::new(-0.1, 0.3) * (dtau * k as f64)).exp())
        .collect();
    let series = CorrelationSeries::from_samples(dtau, values, 0.0).unwrap();
    let spec = power_spectrum(&series, &SpectrumSettings::default()).unwrap();
    assert!(
        (spec.omega_obs - 0.3).abs() <= 1e-3,
        "omega_obs {}",
        spec.omega_obs
    );
    assert!(
        (spec.sigma_fwhm - 0.2).abs() <= 1e-3,
        "sigma {}",
        spec.sigma_fwhm
    );

    println!(
        "criterion 9 (time-domain vs resolvent to 1e-6; total power; Lorentzian extraction): PASS"
    );
}

#[test]
fn criterion_10_byte_identical_outputs_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.cfg");
    std::fs::write(
        &config,
        "task = steady-observables\ngamma2 = 3\n\
         axis1_name = delta\naxis1_min = 0\naxis1_max = 1\naxis1_count = 3\n\
         axis2_name = eta\naxis2_min = 0\naxis2_max = 1\naxis2_count = 3\n",
    )
    .unwrap();

    let run = |workers: &str, out: &std::path::Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_qvdp"))
            .args(["sweep", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .env("VDP_WORKERS", workers)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };

    let out1 = run("1", &dir.path().join("w1.csv"));
    let out4 = run("4", &dir.path().join("w4.csv"));
    let out4b = run("4", &dir.path().join("w4b.csv"));
    assert_eq!(out1, out4, "outputs differ between 1 and 4 workers");
    assert_eq!(out4, out4b, "repeated identical invocation differs");
    assert!(!out1.is_empty());

    println!("criterion 10 (byte-identical sweep outputs across worker counts): PASS");
}

/// Stationary populations of the diagonal rate equations (independent oracle).
fn rate_equation_oracle(gamma1: f64, gamma2: f64, n: usize) -> Vec<f64> {
    let mut a = vec![vec![0.0f64; n]; n];
    for row in 0..n {
        let nf = row as f64;
        if row >= 1 {
            a[row][row - 1] += gamma1 * nf;
        }
        if row + 1 < n {
            a[row][row] -= gamma1 * (nf + 1.0);
        }
        if row + 2 < n {
            a[row][row + 2] += gamma2 * (nf + 2.0) * (nf + 1.0);
        }
        a[row][row] -= gamma2 * nf * (nf - 1.0);
    }
    let mut b = vec![0.0f64; n];
    for col in 0..n {
        a[n - 1][col] = 1.0;
    }
    b[n - 1] = 1.0;
    // Gaussian elimination with partial pivoting
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * b[k];
        }
        b[col] = acc / a[col][col];
    }
    b
}
