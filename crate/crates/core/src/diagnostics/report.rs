use std::fmt::Display;
use std::io::Write;

use super::least_squares_slope;
use crate::error::{invalid, Result};

/// Pass/fail thresholds attached to a report. Unset fields are not checked.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Thresholds {
    pub min_rate: Option<f64>,
    pub max_terminal: Option<f64>,
}

impl Thresholds {
    pub fn check(&self, rate: f64, terminal: f64) -> bool {
        self.min_rate.is_none_or(|m| rate >= m) && self.max_terminal.is_none_or(|m| terminal <= m)
    }
}

/// Errors against a mesh-like parameter with a fitted log–log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub mesh_sizes: Vec<f64>,
    pub errors: Vec<f64>,
    pub fitted_rate: f64,
    pub reference: String,
    pub passed: bool,
    pub thresholds: Thresholds,
}

impl ConvergenceReport {
    /// Fits the rate over the entries with positive error. All-zero errors
    /// give an infinite rate; a single positive entry gives NaN. The
    /// terminal value checked against `max_terminal` is the error at the
    /// smallest mesh size.
    pub fn new(mesh_sizes: Vec<f64>, errors: Vec<f64>, reference: impl Into<String>, thresholds: Thresholds) -> Result<Self> {
        if mesh_sizes.len() != errors.len() || mesh_sizes.len() < 3 {
            return invalid(format!(
                "a report needs at least 3 (mesh, error) pairs, got {} and {}",
                mesh_sizes.len(),
                errors.len()
            ));
        }
        if mesh_sizes.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return invalid("mesh sizes must be positive and finite");
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = mesh_sizes
            .iter()
            .zip(&errors)
            .filter(|(_, e)| **e > 0.0)
            .map(|(h, e)| (h.ln(), e.ln()))
            .unzip();
        let fitted_rate = match xs.len() {
            0 => f64::INFINITY,
            1 => f64::NAN,
            _ => least_squares_slope(&xs, &ys),
        };
        let finest = mesh_sizes
            .iter()
            .zip(&errors)
            .min_by(|a, b| a.0.total_cmp(b.0))
            .map(|(_, e)| *e)
            .expect("non-empty");
        let passed = errors.iter().all(|e| e.is_finite()) && thresholds.check(fitted_rate, finest);
        Ok(Self { mesh_sizes, errors, fitted_rate, reference: reference.into(), passed, thresholds })
    }

    pub fn terminal_error(&self) -> f64 {
        self.mesh_sizes
            .iter()
            .zip(&self.errors)
            .min_by(|a, b| a.0.total_cmp(b.0))
            .map(|(_, e)| *e)
            .unwrap_or(f64::NAN)
    }

    pub fn to_table(&self, mesh_label: &str, error_label: &str) -> CsvTable {
        let mut t = CsvTable::new(&[mesh_label, error_label]);
        t.comment(format!("reference: {}", self.reference));
        t.comment(format!("fitted_rate: {}", self.fitted_rate));
        if let Some(m) = self.thresholds.min_rate {
            t.comment(format!("min_rate: {m}"));
        }
        if let Some(m) = self.thresholds.max_terminal {
            t.comment(format!("max_terminal: {m}"));
        }
        t.comment(format!("passed: {}", self.passed));
        for (h, e) in self.mesh_sizes.iter().zip(&self.errors) {
            t.row(&[h, e]);
        }
        t
    }
}

/// Flat CSV with a `#` comment block: `,` separator, `.` decimal point, LF
/// line ends.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    comments: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), ..Self::default() }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn row(&mut self, cells: &[&dyn Display]) -> &mut Self {
        assert_eq!(cells.len(), self.columns.len(), "row width must match the header");
        self.rows.push(cells.iter().map(|c| c.to_string()).collect());
        self
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn write<W: Write + ?Sized>(&self, out: &mut W) -> Result<()> {
        for c in &self.comments {
            for line in c.lines() {
                writeln!(out, "# {line}")?;
            }
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for r in &self.rows {
            writeln!(out, "{}", r.join(","))?;
        }
        Ok(())
    }
}
