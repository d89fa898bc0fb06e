//! Run settings: flat `key = value` config files plus flag overrides.
//!
//! Every command-line flag has a config key of the same name (dashes become
//! underscores); a dumped effective config reproduces the run exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use qvdp::steady_state::CutoffPolicy;
use qvdp::SystemParams;

/// Effective settings of a run: physical parameters plus numeric knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub delta: f64,
    pub force: f64,
    pub eta: f64,
    pub theta: f64,
    pub gamma1: f64,
    pub gamma2: f64,

    pub cutoff_start: usize,
    pub cutoff_ceiling: usize,
    pub tail_tol: f64,
    pub obs_tol: f64,

    pub dtau: f64,
    pub tau_max: f64,
    pub decay_rel: f64,
    pub omega_max: f64,
    pub omega_resolution: f64,

    /// 0 selects the automatic extent `1 + 3 sqrt(n_bar + 1)`.
    pub wigner_extent: f64,
    pub wigner_points: usize,
    pub phase_resolution: usize,

    pub task: String,
    pub axis1_name: String,
    pub axis1_min: f64,
    pub axis1_max: f64,
    pub axis1_count: usize,
    pub axis2_name: String,
    pub axis2_min: f64,
    pub axis2_max: f64,
    pub axis2_count: usize,

    // classical-subcommand inputs
    pub r0: f64,
    pub phi0: f64,
    pub duration: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_count: usize,
    pub grid_points: usize,
    pub r_lo: f64,
    /// 0 selects the automatic bound `3 R0 + 3`.
    pub r_hi: f64,

    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        let corr = qvdp::dynamics::CorrelationSettings::default();
        let spec = qvdp::observables::SpectrumSettings::default();
        let cutoff = CutoffPolicy::default();
        Self {
            delta: 0.0,
            force: 0.0,
            eta: 0.0,
            theta: 0.0,
            gamma1: 1.0,
            gamma2: 1.0,
            cutoff_start: cutoff.start,
            cutoff_ceiling: cutoff.ceiling,
            tail_tol: cutoff.tail_tol,
            obs_tol: cutoff.obs_tol,
            dtau: corr.dtau,
            tau_max: corr.tau_max,
            decay_rel: corr.decay_rel,
            omega_max: spec.omega_max,
            omega_resolution: spec.omega_resolution,
            wigner_extent: 0.0,
            wigner_points: 101,
            phase_resolution: 1024,
            task: "steady-observables".into(),
            axis1_name: String::new(),
            axis1_min: 0.0,
            axis1_max: 0.0,
            axis1_count: 0,
            axis2_name: String::new(),
            axis2_min: 0.0,
            axis2_max: 0.0,
            axis2_count: 0,
            r0: 1.0,
            phi0: 0.0,
            duration: 100.0,
            delta_min: 0.0,
            delta_max: 1.0,
            delta_count: 11,
            grid_points: 256,
            r_lo: 1e-3,
            r_hi: 0.0,
            seed: 0,
        }
    }
}

/// A usage-level error (bad config key or value); exits with code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

impl Settings {
    pub fn system_params(&self) -> Result<SystemParams, qvdp::Error> {
        SystemParams::new(
            self.delta,
            self.force,
            self.eta,
            self.theta,
            self.gamma1,
            self.gamma2,
        )
    }

    pub fn cutoff_policy(&self) -> CutoffPolicy {
        CutoffPolicy {
            start: self.cutoff_start,
            ceiling: self.cutoff_ceiling,
            tail_tol: self.tail_tol,
            obs_tol: self.obs_tol,
        }
    }

    pub fn correlation_settings(&self) -> qvdp::dynamics::CorrelationSettings {
        qvdp::dynamics::CorrelationSettings {
            dtau: self.dtau,
            tau_max: self.tau_max,
            decay_rel: self.decay_rel,
            ..Default::default()
        }
    }

    pub fn spectrum_settings(&self) -> qvdp::observables::SpectrumSettings {
        qvdp::observables::SpectrumSettings {
            omega_max: self.omega_max,
            omega_resolution: self.omega_resolution,
            crosscheck: true,
        }
    }

    /// Apply a `key = value` assignment; unknown keys are usage errors naming
    /// the key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), UsageError> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, UsageError> {
            value
                .parse::<T>()
                .map_err(|_| UsageError(format!("invalid value {value:?} for key {key:?}")))
        }
        match key {
            "delta" => self.delta = parse(key, value)?,
            "force" => self.force = parse(key, value)?,
            "eta" => self.eta = parse(key, value)?,
            "theta" => self.theta = parse(key, value)?,
            "gamma1" => self.gamma1 = parse(key, value)?,
            "gamma2" => self.gamma2 = parse(key, value)?,
            "cutoff_start" => self.cutoff_start = parse(key, value)?,
            "cutoff_ceiling" => self.cutoff_ceiling = parse(key, value)?,
            "tail_tol" => self.tail_tol = parse(key, value)?,
            "obs_tol" => self.obs_tol = parse(key, value)?,
            "dtau" => self.dtau = parse(key, value)?,
            "tau_max" => self.tau_max = parse(key, value)?,
            "decay_rel" => self.decay_rel = parse(key, value)?,
            "omega_max" => self.omega_max = parse(key, value)?,
            "omega_resolution" => self.omega_resolution = parse(key, value)?,
            "wigner_extent" => self.wigner_extent = parse(key, value)?,
            "wigner_points" => self.wigner_points = parse(key, value)?,
            "phase_resolution" => self.phase_resolution = parse(key, value)?,
            "task" => self.task = value.to_string(),
            "axis1_name" => self.axis1_name = value.to_string(),
            "axis1_min" => self.axis1_min = parse(key, value)?,
            "axis1_max" => self.axis1_max = parse(key, value)?,
            "axis1_count" => self.axis1_count = parse(key, value)?,
            "axis2_name" => self.axis2_name = value.to_string(),
            "axis2_min" => self.axis2_min = parse(key, value)?,
            "axis2_max" => self.axis2_max = parse(key, value)?,
            "axis2_count" => self.axis2_count = parse(key, value)?,
            "r0" => self.r0 = parse(key, value)?,
            "phi0" => self.phi0 = parse(key, value)?,
            "duration" => self.duration = parse(key, value)?,
            "delta_min" => self.delta_min = parse(key, value)?,
            "delta_max" => self.delta_max = parse(key, value)?,
            "delta_count" => self.delta_count = parse(key, value)?,
            "grid_points" => self.grid_points = parse(key, value)?,
            "r_lo" => self.r_lo = parse(key, value)?,
            "r_hi" => self.r_hi = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Err(UsageError(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Parse a flat config file (`key = value` lines, `#` comments).
    pub fn apply_file(&mut self, path: &Path) -> Result<(), UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), UsageError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(UsageError(format!(
                    "config line {}: expected key = value, got {raw:?}",
                    lineno + 1
                )));
            };
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// All settings as ordered `key = value` pairs (the dump format and the
    /// metadata header share this).
    pub fn entries(&self) -> Vec<(String, String)> {
        let f = |v: f64| format_float(v);
        vec![
            ("delta".into(), f(self.delta)),
            ("force".into(), f(self.force)),
            ("eta".into(), f(self.eta)),
            ("theta".into(), f(self.theta)),
            ("gamma1".into(), f(self.gamma1)),
            ("gamma2".into(), f(self.gamma2)),
            ("cutoff_start".into(), self.cutoff_start.to_string()),
            ("cutoff_ceiling".into(), self.cutoff_ceiling.to_string()),
            ("tail_tol".into(), f(self.tail_tol)),
            ("obs_tol".into(), f(self.obs_tol)),
            ("dtau".into(), f(self.dtau)),
            ("tau_max".into(), f(self.tau_max)),
            ("decay_rel".into(), f(self.decay_rel)),
            ("omega_max".into(), f(self.omega_max)),
            ("omega_resolution".into(), f(self.omega_resolution)),
            ("wigner_extent".into(), f(self.wigner_extent)),
            ("wigner_points".into(), self.wigner_points.to_string()),
            ("phase_resolution".into(), self.phase_resolution.to_string()),
            ("task".into(), self.task.clone()),
            ("axis1_name".into(), self.axis1_name.clone()),
            ("axis1_min".into(), f(self.axis1_min)),
            ("axis1_max".into(), f(self.axis1_max)),
            ("axis1_count".into(), self.axis1_count.to_string()),
            ("axis2_name".into(), self.axis2_name.clone()),
            ("axis2_min".into(), f(self.axis2_min)),
            ("axis2_max".into(), f(self.axis2_max)),
            ("axis2_count".into(), self.axis2_count.to_string()),
            ("r0".into(), f(self.r0)),
            ("phi0".into(), f(self.phi0)),
            ("duration".into(), f(self.duration)),
            ("delta_min".into(), f(self.delta_min)),
            ("delta_max".into(), f(self.delta_max)),
            ("delta_count".into(), self.delta_count.to_string()),
            ("grid_points".into(), self.grid_points.to_string()),
            ("r_lo".into(), f(self.r_lo)),
            ("r_hi".into(), f(self.r_hi)),
            ("seed".into(), self.seed.to_string()),
        ]
    }

    /// Render the effective config in the file format.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    /// Key -> value view of [`Settings::entries`].
    pub fn entry_map(&self) -> BTreeMap<String, String> {
        self.entries().into_iter().collect()
    }
}

/// Floating-point rendering used everywhere in output files: 12 significant
/// digits, scientific.
pub fn format_float(v: f64) -> String {
    format!("{v:.11e}")
}
