//! Subcommand implementations, producing renderable reports.

use qvdp::classical::{
    arnold_boundaries, fixed_points, integrate, nullclines, pitchfork_critical_eta,
    squeezing_lock_phase, to_cartesian, FixedPointSearch, PhaseGrid, PhasePoint,
};
use qvdp::dynamics::correlation_bdag_b;
use qvdp::integrate::IntegratorSettings;
use qvdp::observables::{mandel_q, phase_distribution, power_spectrum, wigner_strict};
use qvdp::steady_state::auto_cutoff;

use crate::config::{format_float, Settings};
use crate::output::{sweep_report, Report};
use crate::sweep::{run_sweep, wigner_grid, SweepSpec};

/// Errors split by exit code: usage problems exit 1, numeric failures exit 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(qvdp::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Numeric(e) => write!(f, "numeric failure [{}]: {e}", e.code()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

impl From<qvdp::Error> for CliError {
    fn from(e: qvdp::Error) -> Self {
        match e {
            qvdp::Error::InvalidParams(_) | qvdp::Error::Precondition(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Numeric(other),
        }
    }
}

impl From<crate::config::UsageError> for CliError {
    fn from(e: crate::config::UsageError) -> Self {
        CliError::Usage(e.0)
    }
}

pub type CliResult = Result<Report, CliError>;

pub fn steady(settings: &Settings) -> CliResult {
    let params = settings.system_params()?;
    let conv = auto_cutoff(&params, &settings.cutoff_policy())?;
    let q = mandel_q(&conv.state.rho)?;
    let mut report = Report::new(settings);
    report
        .meta_float("min_eigenvalue", conv.state.min_eigenvalue)
        .meta_float("tail_population", conv.state.rho.tail_population())
        .columns(&["n_bar", "q_mandel", "cutoff_used", "residual"])
        .row(vec![
            format_float(conv.state.rho.mean_occupation()),
            format_float(q),
            conv.spec.dim().to_string(),
            format_float(conv.state.residual),
        ]);
    Ok(report)
}

pub fn spectrum(settings: &Settings) -> CliResult {
    let params = settings.system_params()?;
    let conv = auto_cutoff(&params, &settings.cutoff_policy())?;
    let l = qvdp::liouvillian::assemble(&params, conv.spec);
    let g = correlation_bdag_b(&conv.state.rho, &l, &settings.correlation_settings())?;
    let spec = power_spectrum(&g, &settings.spectrum_settings())?;
    let mut report = Report::new(settings);
    report
        .meta_float("n_bar", g.n_bar)
        .meta_float("omega_obs", spec.omega_obs)
        .meta_float("sigma_fwhm", spec.sigma_fwhm)
        .meta("multi_peak", spec.multi_peak.to_string())
        .meta_float("total_power", spec.total_power)
        .meta_float("coherent_weight", spec.coherent_weight)
        .meta_float("correlation_residual", g.residual)
        .meta("cutoff_used", conv.spec.dim().to_string())
        .columns(&["omega", "s"]);
    for (w, s) in spec.omega.iter().zip(spec.values.iter()) {
        report.row(vec![format_float(*w), format_float(*s)]);
    }
    Ok(report)
}

pub fn wigner(settings: &Settings) -> CliResult {
    let params = settings.system_params()?;
    let conv = auto_cutoff(&params, &settings.cutoff_policy())?;
    let grid = wigner_grid(settings, &conv.state.rho)?;
    let field = wigner_strict(&conv.state.rho, &grid)?;
    let dist = phase_distribution(&conv.state.rho, settings.phase_resolution)?;
    let mut report = Report::new(settings);
    report
        .meta_float("n_bar", conv.state.rho.mean_occupation())
        .meta_float("normalization", field.normalization)
        .meta_float("wigner_min", field.min_value())
        .meta("phase_peaks", dist.local_maxima(1e-3).len().to_string())
        .meta("cutoff_used", conv.spec.dim().to_string())
        .columns(&["re_alpha", "im_alpha", "w"]);
    for (i, &x) in field.grid.x.iter().enumerate() {
        for (j, &y) in field.grid.y.iter().enumerate() {
            report.row(vec![
                format_float(x),
                format_float(y),
                format_float(field.values[(i, j)]),
            ]);
        }
    }
    Ok(report)
}

pub fn classical_fixed_points(settings: &Settings) -> CliResult {
    let params = settings.system_params()?;
    let fps = fixed_points(&params, &FixedPointSearch::default())?;
    let mut report = Report::new(settings);
    report.meta("fp_count", fps.len().to_string()).columns(&[
        "r",
        "phi",
        "stability",
        "lambda1_re",
        "lambda1_im",
        "lambda2_re",
        "lambda2_im",
    ]);
    for fp in &fps {
        report.row(vec![
            format_float(fp.point.r),
            format_float(fp.point.phi),
            fp.stability.label().to_string(),
            format_float(fp.eigenvalues.0.re),
            format_float(fp.eigenvalues.0.im),
            format_float(fp.eigenvalues.1.re),
            format_float(fp.eigenvalues.1.im),
        ]);
    }
    Ok(report)
}

pub fn classical_nullclines(settings: &Settings) -> CliResult {
    let params = settings.system_params()?;
    let r_hi = if settings.r_hi > 0.0 {
        settings.r_hi
    } else {
        3.0 * params.limit_cycle_radius() + 3.0
    };
    let grid = PhaseGrid::new(
        settings.r_lo,
        r_hi,
        settings.grid_points,
        settings.grid_points,
    )?;
    let nc = nullclines(&params, &grid)?;
    let mut report = Report::new(settings);
    report
        .meta("r_segments", nc.r_nullcline.len().to_string())
        .meta("phi_segments", nc.phi_nullcline.len().to_string())
        .columns(&["curve", "r0", "phi0", "r1", "phi1", "x0", "y0", "x1", "y1"]);
    for (label, segs) in [("r", &nc.r_nullcline), ("phi", &nc.phi_nullcline)] {
        let cart = to_cartesian(segs);
        for (seg, xy) in segs.iter().zip(cart.iter()) {
            report.row(vec![
                label.to_string(),
                format_float(seg[0].0),
                format_float(seg[0].1),
                format_float(seg[1].0),
                format_float(seg[1].1),
                format_float(xy[0].0),
                format_float(xy[0].1),
                format_float(xy[1].0),
                format_float(xy[1].1),
            ]);
        }
    }
    Ok(report)
}

pub fn classical_integrate(settings: &Settings) -> CliResult {
    let params = settings.system_params()?;
    let p0 = PhasePoint::new(settings.r0, settings.phi0)?;
    let traj = integrate(
        p0,
        &params,
        settings.duration,
        &IntegratorSettings::classical(),
    )?;
    let mut report = Report::new(settings);
    report
        .meta("converged", traj.converged.to_string())
        .meta_float("final_r", traj.final_unwrapped.0)
        .meta_float("final_phi_unwrapped", traj.final_unwrapped.1)
        .columns(&["t", "r", "phi"]);
    for (t, p) in traj.times.iter().zip(traj.points.iter()) {
        report.row(vec![
            format_float(*t),
            format_float(p.r),
            format_float(p.phi),
        ]);
    }
    Ok(report)
}

pub fn classical_lock_phase(settings: &Settings) -> CliResult {
    let params = settings.system_params()?;
    let lock = squeezing_lock_phase(&params)?;
    let mut report = Report::new(settings);
    report
        .columns(&["branch", "phi_ss"])
        .row(vec!["principal".into(), format_float(lock.principal)])
        .row(vec!["companion".into(), format_float(lock.companion)]);
    Ok(report)
}

pub fn classical_arnold(settings: &Settings) -> CliResult {
    let params = settings.system_params()?;
    if settings.delta_count < 2 || settings.delta_min > settings.delta_max {
        return Err(CliError::Usage(
            "arnold needs delta_count >= 2 and an ordered delta range".into(),
        ));
    }
    let deltas: Vec<f64> = (0..settings.delta_count)
        .map(|i| {
            settings.delta_min
                + (settings.delta_max - settings.delta_min) * i as f64
                    / (settings.delta_count - 1) as f64
        })
        .collect();
    let b = arnold_boundaries(&params, &deltas);
    let mut report = Report::new(settings);
    report.columns(&["delta", "eta_min", "force_min"]);
    for i in 0..b.deltas.len() {
        report.row(vec![
            format_float(b.deltas[i]),
            format_float(b.eta_min[i]),
            format_float(b.force_min[i]),
        ]);
    }
    Ok(report)
}

pub fn classical_pitchfork(settings: &Settings) -> CliResult {
    let params = settings.system_params()?;
    let eta_c = pitchfork_critical_eta(&params)?;
    let mut report = Report::new(settings);
    report
        .columns(&["force", "eta_critical"])
        .row(vec![format_float(params.force), format_float(eta_c)]);
    Ok(report)
}

pub fn sweep(settings: &Settings) -> CliResult {
    let spec = SweepSpec::from_settings(settings)?;
    let result = run_sweep(&spec)?;
    Ok(sweep_report(&result))
}
