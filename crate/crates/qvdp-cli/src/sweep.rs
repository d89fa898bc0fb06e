//! Deterministic parameter-sweep engine.
//!
//! Grid points are independent pure computations executed on a fixed-size
//! worker pool (`VDP_WORKERS` overrides the size); results are buffered and
//! emitted in lexicographic axis order, so output bytes do not depend on the
//! pool size.  A failing point records its error code in its row instead of
//! aborting the sweep.

use rayon::prelude::*;

use qvdp::classical::{fixed_points, FixedPointSearch};
use qvdp::dynamics::correlation_bdag_b;
use qvdp::observables::{mandel_q, phase_distribution, power_spectrum, wigner, PhaseSpaceGrid};
use qvdp::steady_state::auto_cutoff;

use crate::config::{format_float, Settings, UsageError};

/// Sweep task; decides which columns each row carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    SteadyObservables,
    Spectrum,
    Wigner,
    ClassicalFixedPoints,
    ArnoldQuantum,
    ArnoldClassical,
}

impl Task {
    pub fn parse(name: &str) -> Result<Self, UsageError> {
        Ok(match name {
            "steady-observables" => Task::SteadyObservables,
            "spectrum" => Task::Spectrum,
            "wigner" => Task::Wigner,
            "classical-fixed-points" => Task::ClassicalFixedPoints,
            "arnold-quantum" => Task::ArnoldQuantum,
            "arnold-classical" => Task::ArnoldClassical,
            _ => {
                return Err(UsageError(format!(
                    "unknown task {name:?} (expected steady-observables, spectrum, wigner, \
                     classical-fixed-points, arnold-quantum or arnold-classical)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Task::SteadyObservables => "steady-observables",
            Task::Spectrum => "spectrum",
            Task::Wigner => "wigner",
            Task::ClassicalFixedPoints => "classical-fixed-points",
            Task::ArnoldQuantum => "arnold-quantum",
            Task::ArnoldClassical => "arnold-classical",
        }
    }

    /// Observable columns of this task (axis columns and the error column are
    /// added by the writer).
    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            Task::SteadyObservables => &["n_bar", "q_mandel", "cutoff_used", "residual"],
            Task::Spectrum | Task::ArnoldQuantum => &[
                "n_bar",
                "q_mandel",
                "omega_obs",
                "sigma_fwhm",
                "multi_peak",
                "cutoff_used",
                "residual",
            ],
            Task::Wigner => &[
                "n_bar",
                "q_mandel",
                "phase_peaks",
                "wigner_min",
                "cutoff_used",
                "residual",
            ],
            Task::ClassicalFixedPoints => &["fp_count", "fp_stable", "fp_unstable"],
            Task::ArnoldClassical => &["eta_min", "force_min"],
        }
    }
}

/// One formatted output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

/// Axis of a sweep over one `SystemParams` field.
#[derive(Debug, Clone)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn value(&self, index: usize) -> f64 {
        if self.count == 1 {
            return self.min;
        }
        self.min + (self.max - self.min) * index as f64 / (self.count - 1) as f64
    }
}

const AXIS_FIELDS: &[&str] = &["delta", "force", "eta", "theta", "gamma1", "gamma2"];

/// A validated sweep specification.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub task: Task,
    pub base: Settings,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
}

impl SweepSpec {
    /// Validate the axis/task fields of `settings`.
    pub fn from_settings(settings: &Settings) -> Result<Self, UsageError> {
        let task = Task::parse(&settings.task)?;
        let axis1 = axis_from(settings, 1)?;
        let axis1 = axis1
            .ok_or_else(|| UsageError("sweep needs at least axis1_name/min/max/count".into()))?;
        let axis2 = axis_from(settings, 2)?;
        if let Some(a2) = &axis2 {
            if a2.name == axis1.name {
                return Err(UsageError(format!(
                    "sweep axes must be distinct, both are {:?}",
                    axis1.name
                )));
            }
        }
        Ok(Self {
            task,
            base: settings.clone(),
            axis1,
            axis2,
        })
    }

    pub fn rows_expected(&self) -> usize {
        self.axis1.count * self.axis2.as_ref().map_or(1, |a| a.count)
    }
}

fn axis_from(settings: &Settings, which: usize) -> Result<Option<Axis>, UsageError> {
    let (name, min, max, count) = if which == 1 {
        (
            &settings.axis1_name,
            settings.axis1_min,
            settings.axis1_max,
            settings.axis1_count,
        )
    } else {
        (
            &settings.axis2_name,
            settings.axis2_min,
            settings.axis2_max,
            settings.axis2_count,
        )
    };
    if name.is_empty() {
        return Ok(None);
    }
    if !AXIS_FIELDS.contains(&name.as_str()) {
        return Err(UsageError(format!(
            "axis{which}_name {name:?} is not a SystemParams field"
        )));
    }
    if count < 2 {
        return Err(UsageError(format!(
            "axis{which}_count must be >= 2, got {count}"
        )));
    }
    if !min.is_finite() || !max.is_finite() || min > max {
        return Err(UsageError(format!(
            "axis{which} range [{min}, {max}] is not a finite ordered range"
        )));
    }
    Ok(Some(Axis {
        name: name.clone(),
        min,
        max,
        count,
    }))
}

fn apply_axis(params: &mut Settings, name: &str, value: f64) {
    match name {
        "delta" => params.delta = value,
        "force" => params.force = value,
        "eta" => params.eta = value,
        "theta" => params.theta = value,
        "gamma1" => params.gamma1 = value,
        "gamma2" => params.gamma2 = value,
        _ => unreachable!("axis names validated at construction"),
    }
}

/// One output row of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub axis_values: Vec<f64>,
    pub cells: Vec<Cell>,
    pub error: Option<&'static str>,
}

/// Complete sweep result in lexicographic axis order.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

/// Worker-pool size: `VDP_WORKERS` or available parallelism.
pub fn worker_count() -> usize {
    std::env::var("VDP_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Run every grid point on the worker pool; deterministic output ordering.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, qvdp::Error> {
    let points: Vec<(usize, Vec<f64>)> = match &spec.axis2 {
        None => (0..spec.axis1.count)
            .map(|i| (i, vec![spec.axis1.value(i)]))
            .collect(),
        Some(a2) => (0..spec.axis1.count)
            .flat_map(|i| {
                let a2 = a2.clone();
                (0..a2.count)
                    .map(move |j| (i * a2.count + j, vec![spec.axis1.value(i), a2.value(j)]))
            })
            .collect(),
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| qvdp::Error::SolverFailure {
            context: format!("worker pool: {e}"),
            residual: f64::NAN,
        })?;

    let mut rows: Vec<(usize, SweepRow)> = pool.install(|| {
        points
            .par_iter()
            .map(|(index, axis_values)| {
                let mut point = spec.base.clone();
                apply_axis(&mut point, &spec.axis1.name, axis_values[0]);
                if let Some(a2) = &spec.axis2 {
                    apply_axis(&mut point, &a2.name, axis_values[1]);
                }
                let row = match evaluate_point(spec.task, &point) {
                    Ok(cells) => SweepRow {
                        axis_values: axis_values.clone(),
                        cells,
                        error: None,
                    },
                    Err(e) => SweepRow {
                        axis_values: axis_values.clone(),
                        cells: vec![Cell::Empty; spec.task.columns().len()],
                        error: Some(e.code()),
                    },
                };
                (*index, row)
            })
            .collect()
    });
    rows.sort_by_key(|(index, _)| *index);
    let rows: Vec<SweepRow> = rows.into_iter().map(|(_, row)| row).collect();

    if rows.iter().all(|r| r.error.is_some()) {
        return Err(qvdp::Error::SolverFailure {
            context: "every sweep point failed".into(),
            residual: f64::NAN,
        });
    }
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
    })
}

/// Evaluate one grid point for `task`.
pub fn evaluate_point(task: Task, settings: &Settings) -> Result<Vec<Cell>, qvdp::Error> {
    let params = settings.system_params()?;
    match task {
        Task::SteadyObservables => {
            let conv = auto_cutoff(&params, &settings.cutoff_policy())?;
            let q = mandel_q(&conv.state.rho)?;
            Ok(vec![
                Cell::Float(conv.state.rho.mean_occupation()),
                Cell::Float(q),
                Cell::Int(conv.spec.dim() as i64),
                Cell::Float(conv.state.residual),
            ])
        }
        Task::Spectrum | Task::ArnoldQuantum => {
            let conv = auto_cutoff(&params, &settings.cutoff_policy())?;
            let l = qvdp::liouvillian::assemble(&params, conv.spec);
            let g = correlation_bdag_b(&conv.state.rho, &l, &settings.correlation_settings())?;
            let spectrum = power_spectrum(&g, &settings.spectrum_settings())?;
            let q = mandel_q(&conv.state.rho)?;
            Ok(vec![
                Cell::Float(conv.state.rho.mean_occupation()),
                Cell::Float(q),
                Cell::Float(spectrum.omega_obs),
                Cell::Float(spectrum.sigma_fwhm),
                Cell::Bool(spectrum.multi_peak),
                Cell::Int(conv.spec.dim() as i64),
                Cell::Float(conv.state.residual),
            ])
        }
        Task::Wigner => {
            let conv = auto_cutoff(&params, &settings.cutoff_policy())?;
            let grid = wigner_grid(settings, &conv.state.rho)?;
            let field = wigner(&conv.state.rho, &grid)?;
            let dist = phase_distribution(&conv.state.rho, settings.phase_resolution)?;
            let q = mandel_q(&conv.state.rho)?;
            Ok(vec![
                Cell::Float(conv.state.rho.mean_occupation()),
                Cell::Float(q),
                Cell::Int(dist.local_maxima(1e-3).len() as i64),
                Cell::Float(field.min_value()),
                Cell::Int(conv.spec.dim() as i64),
                Cell::Float(conv.state.residual),
            ])
        }
        Task::ClassicalFixedPoints => {
            let fps = fixed_points(&params, &FixedPointSearch::default())?;
            let stable = fps.iter().filter(|fp| fp.stability.is_stable()).count();
            Ok(vec![
                Cell::Int(fps.len() as i64),
                Cell::Int(stable as i64),
                Cell::Int((fps.len() - stable) as i64),
            ])
        }
        Task::ArnoldClassical => {
            let b = qvdp::classical::arnold_boundaries(&params, &[params.delta]);
            Ok(vec![Cell::Float(b.eta_min[0]), Cell::Float(b.force_min[0])])
        }
    }
}

pub fn wigner_grid(
    settings: &Settings,
    rho: &qvdp::DensityMatrix,
) -> Result<PhaseSpaceGrid, qvdp::Error> {
    if settings.wigner_extent > 0.0 {
        PhaseSpaceGrid::symmetric(settings.wigner_extent, settings.wigner_points)
    } else {
        let extent = 1.0 + 3.0 * (rho.mean_occupation() + 1.0).sqrt();
        PhaseSpaceGrid::symmetric(extent, settings.wigner_points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep_settings(text: &str) -> Settings {
        let mut s = Settings::default();
        s.apply_text(text).unwrap();
        s
    }

    #[test]
    fn axis_validation() {
        let s = sweep_settings("task = steady-observables\naxis1_name = zeta\naxis1_count = 3\n");
        assert!(SweepSpec::from_settings(&s).is_err());
        let s = sweep_settings("task = steady-observables\naxis1_name = eta\naxis1_count = 1\n");
        assert!(SweepSpec::from_settings(&s).is_err());
        let s = sweep_settings(
            "task = steady-observables\naxis1_name = eta\naxis1_min = 0\naxis1_max = 1\naxis1_count = 3\n\
             axis2_name = eta\naxis2_min = 0\naxis2_max = 1\naxis2_count = 3\n",
        );
        assert!(SweepSpec::from_settings(&s).is_err());
    }

    #[test]
    fn rows_are_in_lexicographic_axis_order() {
        let s = sweep_settings(
            "task = arnold-classical\ngamma2 = 3\n\
             axis1_name = delta\naxis1_min = 0\naxis1_max = 1\naxis1_count = 3\n\
             axis2_name = eta\naxis2_min = 0\naxis2_max = 1\naxis2_count = 2\n",
        );
        let spec = SweepSpec::from_settings(&s).unwrap();
        let result = run_sweep(&spec).unwrap();
        assert_eq!(result.rows.len(), 6);
        let expect = [
            (0.0, 0.0),
            (0.0, 1.0),
            (0.5, 0.0),
            (0.5, 1.0),
            (1.0, 0.0),
            (1.0, 1.0),
        ];
        for (row, (a1, a2)) in result.rows.iter().zip(expect) {
            assert_eq!(row.axis_values[0], a1);
            assert_eq!(row.axis_values[1], a2);
        }
    }

    #[test]
    fn failed_points_record_error_codes() {
        // gamma2 = 0 at one axis point makes params invalid for that row only
        let s = sweep_settings(
            "task = classical-fixed-points\nforce = 1\ndelta = 1\n\
             axis1_name = gamma2\naxis1_min = 0\naxis1_max = 3\naxis1_count = 2\n",
        );
        let spec = SweepSpec::from_settings(&s).unwrap();
        let result = run_sweep(&spec).unwrap();
        assert_eq!(result.rows.len(), 2);
        assert_eq!(result.rows[0].error, Some("E_PARAMS"));
        assert!(result.rows[1].error.is_none());
    }

    #[test]
    fn all_points_failing_is_a_sweep_error() {
        let s = sweep_settings(
            "task = steady-observables\ngamma2 = 3\n\
             axis1_name = gamma1\naxis1_min = -2\naxis1_max = -1\naxis1_count = 2\n",
        );
        let spec = SweepSpec::from_settings(&s).unwrap();
        assert!(run_sweep(&spec).is_err());
    }
}
