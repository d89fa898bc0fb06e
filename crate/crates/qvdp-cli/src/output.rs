//! CSV output with a `#`-prefixed metadata header.
//!
//! Every report starts with the tool version, the effective settings, and any
//! task-specific metadata, followed by a CSV header row and the data rows.
//! Floating-point values carry 12 significant digits.  Nothing run-specific
//! (paths, timestamps, worker counts) enters the output, so identical
//! invocations produce byte-identical files.

use std::fmt::Write as _;

use crate::config::{format_float, Settings};
use crate::sweep::{Cell, SweepResult};

/// A renderable table with metadata.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(settings: &Settings) -> Self {
        let mut metadata = vec![("qvdp".to_string(), env!("CARGO_PKG_VERSION").to_string())];
        metadata.extend(settings.entries());
        Self {
            metadata,
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.metadata.push((key.to_string(), value.into()));
        self
    }

    pub fn meta_float(&mut self, key: &str, value: f64) -> &mut Self {
        self.meta(key, format_float(value))
    }

    pub fn columns(&mut self, names: &[&str]) -> &mut Self {
        self.columns = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn row(&mut self, cells: Vec<String>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            writeln!(out, "# {k} = {v}").unwrap();
        }
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }
}

/// Render a sweep result with its effective settings.
pub fn sweep_report(result: &SweepResult) -> Report {
    let spec = &result.spec;
    let mut report = Report::new(&spec.base);
    report.meta("rows", result.rows.len().to_string());

    let mut columns: Vec<&str> = vec![spec.axis1.name.as_str()];
    if let Some(a2) = &spec.axis2 {
        columns.push(a2.name.as_str());
    }
    columns.extend_from_slice(spec.task.columns());
    columns.push("error");
    report.columns(&columns);

    for row in &result.rows {
        let mut cells: Vec<String> = row.axis_values.iter().map(|v| format_float(*v)).collect();
        cells.extend(row.cells.iter().map(Cell::render));
        cells.push(row.error.unwrap_or("").to_string());
        report.row(cells);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_renders_metadata_then_header_then_rows() {
        let settings = Settings::default();
        let mut r = Report::new(&settings);
        r.meta("note", "x");
        r.columns(&["a", "b"]);
        r.row(vec!["1".into(), "2".into()]);
        let text = r.render();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# qvdp = "));
        assert!(lines.iter().any(|l| *l == "# note = x"));
        let header_idx = lines.iter().position(|l| *l == "a,b").unwrap();
        assert_eq!(lines[header_idx + 1], "1,2");
        assert!(lines[..header_idx].iter().all(|l| l.starts_with('#')));
    }

    #[test]
    fn floats_are_rendered_with_twelve_significant_digits() {
        assert_eq!(format_float(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(format_float(0.0), "0.00000000000e0");
    }
}
