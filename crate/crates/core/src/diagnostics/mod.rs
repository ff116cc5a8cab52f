//! Verification harness: conservation audits, decay fits, operator scaling
//! probes, convergence studies and regime checks.

mod audit;
mod convergence;
mod probe;
mod regime;
mod report;

pub use audit::{conservation_audit, fitted_decay_exponent, smoothing_residual};
pub use convergence::{convergence_study, Reference, StudySpec};
pub use probe::{operator_norm_probe, OperatorTag, PROBE_LEVELS};
pub use regime::{regime_check, Claim, RegimeVerdict};
pub use report::{ConvergenceReport, CsvTable, Thresholds};

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
