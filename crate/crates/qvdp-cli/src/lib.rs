//! Command-line front end and sweep engine for the qvdp simulator.
//!
//! Subcommands: `steady`, `wigner`, `spectrum`, `classical {fixed-points,
//! nullclines, integrate, lock-phase, arnold, pitchfork}`, `sweep`.  Each
//! reads an optional flat config file plus flag overrides and writes a CSV
//! report (with `#` metadata header) to stdout or `--out`.
//!
//! Exit codes: 0 success, 1 usage error, 2 numeric failure.

pub mod config;
pub mod output;
pub mod run;
pub mod sweep;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::Settings;
use run::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "qvdp",
    version,
    about = "Squeezing-driven quantum van der Pol oscillator simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady-state observables (n_bar, Mandel Q) with automatic Fock cutoff.
    Steady(CommonArgs),
    /// Steady-state Wigner function on a phase-space grid.
    Wigner(CommonArgs),
    /// Steady-state power spectrum, observed frequency and FWHM.
    Spectrum(CommonArgs),
    /// Classical amplitude-phase analysis.
    Classical(ClassicalArgs),
    /// Parameter sweep over 1 or 2 axes.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key = value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recorded in the output metadata; all algorithms are deterministic.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    force: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    gamma1: Option<f64>,
    #[arg(long)]
    gamma2: Option<f64>,

    #[arg(long)]
    cutoff_start: Option<usize>,
    #[arg(long)]
    cutoff_ceiling: Option<usize>,
    #[arg(long)]
    tail_tol: Option<f64>,
    #[arg(long)]
    obs_tol: Option<f64>,

    #[arg(long)]
    dtau: Option<f64>,
    #[arg(long)]
    tau_max: Option<f64>,
    #[arg(long)]
    decay_rel: Option<f64>,
    #[arg(long)]
    omega_max: Option<f64>,
    #[arg(long)]
    omega_resolution: Option<f64>,

    #[arg(long)]
    wigner_extent: Option<f64>,
    #[arg(long)]
    wigner_points: Option<usize>,
    #[arg(long)]
    phase_resolution: Option<usize>,
}

#[derive(Args)]
struct ClassicalArgs {
    #[command(subcommand)]
    which: ClassicalCommand,
}

#[derive(Subcommand)]
enum ClassicalCommand {
    /// Fixed points of the amplitude-phase flow with stability classes.
    FixedPoints(CommonArgs),
    /// R- and phi-nullclines extracted by marching squares.
    Nullclines(NullclineArgs),
    /// Integrate a trajectory from (r0, phi0).
    Integrate(IntegrateArgs),
    /// Closed-form squeezing lock phase (principal and companion branch).
    LockPhase(CommonArgs),
    /// Arnold-tongue boundaries over a detuning range.
    Arnold(ArnoldArgs),
    /// Critical squeezing of the pitchfork at Delta = 0, theta = 0.
    Pitchfork(CommonArgs),
}

#[derive(Args)]
struct NullclineArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Grid points per axis (>= 128).
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    r_lo: Option<f64>,
    /// Upper amplitude bound; 0 selects 3 R0 + 3.
    #[arg(long)]
    r_hi: Option<f64>,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    phi0: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Args)]
struct ArnoldArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    delta_min: Option<f64>,
    #[arg(long)]
    delta_max: Option<f64>,
    #[arg(long)]
    delta_count: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// steady-observables | spectrum | wigner | classical-fixed-points |
    /// arnold-quantum | arnold-classical
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    axis1_name: Option<String>,
    #[arg(long)]
    axis1_min: Option<f64>,
    #[arg(long)]
    axis1_max: Option<f64>,
    #[arg(long)]
    axis1_count: Option<usize>,
    #[arg(long)]
    axis2_name: Option<String>,
    #[arg(long)]
    axis2_min: Option<f64>,
    #[arg(long)]
    axis2_max: Option<f64>,
    #[arg(long)]
    axis2_count: Option<usize>,
    /// Write the effective config (reproduces this run exactly) to a file.
    #[arg(long)]
    dump_config: Option<PathBuf>,
}

impl CommonArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            s.apply_file(path)?;
        }
        macro_rules! over {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { s.$field = v; })*
            };
        }
        over!(
            seed,
            delta,
            force,
            eta,
            theta,
            gamma1,
            gamma2,
            cutoff_start,
            cutoff_ceiling,
            tail_tol,
            obs_tol,
            dtau,
            tau_max,
            decay_rel,
            omega_max,
            omega_resolution,
            wigner_extent,
            wigner_points,
            phase_resolution
        );
        Ok(s)
    }
}

fn write_report(report: CliResult, out: Option<&PathBuf>) -> i32 {
    match report {
        Ok(report) => {
            let text = report.render();
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("cannot write {}: {e}", path.display());
                        return 1;
                    }
                }
                None => print!("{text}"),
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

/// Entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };

    match cli.command {
        Command::Steady(args) => dispatch(&args, run::steady),
        Command::Wigner(args) => dispatch(&args, run::wigner),
        Command::Spectrum(args) => dispatch(&args, run::spectrum),
        Command::Classical(c) => match c.which {
            ClassicalCommand::FixedPoints(args) => dispatch(&args, run::classical_fixed_points),
            ClassicalCommand::LockPhase(args) => dispatch(&args, run::classical_lock_phase),
            ClassicalCommand::Pitchfork(args) => dispatch(&args, run::classical_pitchfork),
            ClassicalCommand::Nullclines(args) => {
                let settings = args.common.settings().map(|mut s| {
                    if let Some(v) = args.grid_points {
                        s.grid_points = v;
                    }
                    if let Some(v) = args.r_lo {
                        s.r_lo = v;
                    }
                    if let Some(v) = args.r_hi {
                        s.r_hi = v;
                    }
                    s
                });
                finish(
                    settings,
                    args.common.out.as_ref(),
                    run::classical_nullclines,
                )
            }
            ClassicalCommand::Integrate(args) => {
                let settings = args.common.settings().map(|mut s| {
                    if let Some(v) = args.r0 {
                        s.r0 = v;
                    }
                    if let Some(v) = args.phi0 {
                        s.phi0 = v;
                    }
                    if let Some(v) = args.duration {
                        s.duration = v;
                    }
                    s
                });
                finish(settings, args.common.out.as_ref(), run::classical_integrate)
            }
            ClassicalCommand::Arnold(args) => {
                let settings = args.common.settings().map(|mut s| {
                    if let Some(v) = args.delta_min {
                        s.delta_min = v;
                    }
                    if let Some(v) = args.delta_max {
                        s.delta_max = v;
                    }
                    if let Some(v) = args.delta_count {
                        s.delta_count = v;
                    }
                    s
                });
                finish(settings, args.common.out.as_ref(), run::classical_arnold)
            }
        },
        Command::Sweep(args) => {
            let settings = args.common.settings().map(|mut s| {
                macro_rules! over_opt {
                    ($($field:ident),*) => {
                        $(if let Some(v) = args.$field.clone() { s.$field = v; })*
                    };
                }
                over_opt!(task, axis1_name, axis2_name);
                macro_rules! over_num {
                    ($($field:ident),*) => {
                        $(if let Some(v) = args.$field { s.$field = v; })*
                    };
                }
                over_num!(
                    axis1_min,
                    axis1_max,
                    axis1_count,
                    axis2_min,
                    axis2_max,
                    axis2_count
                );
                s
            });
            let settings = match settings {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{e}");
                    return e.exit_code();
                }
            };
            if let Some(path) = &args.dump_config {
                if let Err(e) = std::fs::write(path, settings.dump()) {
                    eprintln!("cannot write {}: {e}", path.display());
                    return 1;
                }
            }
            write_report(run::sweep(&settings), args.common.out.as_ref())
        }
    }
}

fn dispatch(args: &CommonArgs, f: fn(&Settings) -> CliResult) -> i32 {
    finish(args.settings(), args.out.as_ref(), f)
}

fn finish(
    settings: Result<Settings, CliError>,
    out: Option<&PathBuf>,
    f: fn(&Settings) -> CliResult,
) -> i32 {
    match settings {
        Ok(s) => write_report(f(&s), out),
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
