//! Sweep-engine runs of the entrainment maps (reduced grids; the full-size
//! frequency maps are behind `--ignored`).

use qvdp_cli::config::Settings;
use qvdp_cli::sweep::{run_sweep, Cell, SweepSpec};

fn settings(text: &str) -> Settings {
    let mut s = Settings::default();
    s.apply_text(text).unwrap();
    s
}

fn float(cell: &Cell) -> f64 {
    match cell {
        Cell::Float(v) => *v,
        other => panic!("expected float cell, got {other:?}"),
    }
}

#[test]
fn mandel_q_negative_along_harmonic_sweep() {
    let s = settings(
        "task = steady-observables\ndelta = 0.3\ngamma2 = 3\n\
         axis1_name = force\naxis1_min = 0.25\naxis1_max = 2\naxis1_count = 8\n",
    );
    let result = run_sweep(&SweepSpec::from_settings(&s).unwrap()).unwrap();
    assert_eq!(result.rows.len(), 8);
    for row in &result.rows {
        assert!(row.error.is_none());
        let q = float(&row.cells[1]);
        assert!(q < 0.0, "Q = {q} at F = {}", row.axis_values[0]);
    }
}

#[test]
fn squeezing_entrainment_strengthens_along_eta() {
    // reduced slice of the (Delta, eta) frequency map: |omega_obs| is
    // non-increasing along eta at fixed detuning, up to one small inversion
    let s = settings(
        "task = arnold-quantum\ngamma2 = 3\ndelta = 0.4\n\
         axis1_name = eta\naxis1_min = 0.5\naxis1_max = 2\naxis1_count = 4\n",
    );
    let result = run_sweep(&SweepSpec::from_settings(&s).unwrap()).unwrap();
    let omegas: Vec<f64> = result
        .rows
        .iter()
        .map(|r| float(&r.cells[2]).abs())
        .collect();
    let inversions = omegas.windows(2).filter(|w| w[1] > w[0] + 1e-3).count();
    assert!(inversions <= 1, "|omega_obs| along eta: {omegas:?}");
    assert!(
        omegas.last().unwrap() < &(0.5 * omegas[0]),
        "entrainment should strengthen: {omegas:?}"
    );
}

#[test]
fn weak_harmonic_drive_leaves_detuning_visible() {
    let s = settings(
        "task = arnold-quantum\ngamma2 = 3\nforce = 0.5\n\
         axis1_name = delta\naxis1_min = 0.2\naxis1_max = 1\naxis1_count = 3\n",
    );
    let result = run_sweep(&SweepSpec::from_settings(&s).unwrap()).unwrap();
    for row in &result.rows {
        let delta = row.axis_values[0];
        let omega = float(&row.cells[2]);
        assert!(
            (omega.abs() - delta).abs() <= 0.2 * delta,
            "omega_obs {omega} vs delta {delta}"
        );
    }
}

#[test]
fn wigner_task_counts_lobes() {
    let s = settings(
        "task = wigner\ngamma2 = 3\nwigner_points = 61\n\
         axis1_name = eta\naxis1_min = 0\naxis1_max = 1\naxis1_count = 2\n",
    );
    let result = run_sweep(&SweepSpec::from_settings(&s).unwrap()).unwrap();
    // eta = 0: flat ring, no phase peaks; eta = 1: two lobes
    assert_eq!(result.rows[0].cells[2], Cell::Int(0));
    assert_eq!(result.rows[1].cells[2], Cell::Int(2));
}

/// Full-size 11x11 entrainment map over (detuning, squeezing); minutes of
/// runtime, run explicitly with `cargo test -p qvdp-cli --test sweep_maps
/// --release -- --ignored`.
#[test]
#[ignore]
fn full_squeezing_map_11_by_11() {
    let s = settings(
        "task = arnold-quantum\ngamma2 = 3\n\
         axis1_name = delta\naxis1_min = 0\naxis1_max = 1\naxis1_count = 11\n\
         axis2_name = eta\naxis2_min = 0\naxis2_max = 2\naxis2_count = 11\n",
    );
    let result = run_sweep(&SweepSpec::from_settings(&s).unwrap()).unwrap();
    assert_eq!(result.rows.len(), 121);
    // along eta at fixed delta >= 0.2: |omega_obs| non-increasing up to one
    // small inversion
    for i in 2..11 {
        let omegas: Vec<f64> = result.rows[i * 11..(i + 1) * 11]
            .iter()
            .filter(|r| r.error.is_none())
            .map(|r| float(&r.cells[2]).abs())
            .collect();
        let inversions = omegas.windows(2).filter(|w| w[1] > w[0] + 1e-3).count();
        assert!(inversions <= 1, "delta index {i}: {omegas:?}");
    }
}
