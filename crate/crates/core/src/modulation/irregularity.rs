//! Grid estimates of the `(ρ, γ)`-irregularity norm
//! `sup_{a, r<t} ⟨a⟩^ρ |Φ_{t,r}(a)| / (t - r)^γ`.

use rayon::prelude::*;

use super::ModulationPath;
use crate::error::{invalid, Result};

/// Default density of the positive frequency grid.
pub const POINTS_PER_DECADE: usize = 64;
/// Default number of uniform time nodes.
pub const TIME_NODES: usize = 129;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrregularityGrid {
    pub a_max: f64,
    /// Number of positive frequencies; the scanned set is `{0} ∪ ±grid`.
    pub a_grid_size: usize,
    pub time_grid_size: usize,
}

impl IrregularityGrid {
    /// Default grid up to `a_max`: 64 points per decade above
    /// `min(1, a_max / 10)` and 129 time nodes.
    pub fn with_a_max(a_max: f64) -> Self {
        let lo = a_lower(a_max);
        let decades = (a_max / lo).log10().max(0.0);
        Self {
            a_max,
            a_grid_size: (POINTS_PER_DECADE as f64 * decades).ceil() as usize + 1,
            time_grid_size: TIME_NODES,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.a_max.is_finite() && self.a_max > 0.0) {
            return invalid(format!("a_max must be positive, got {}", self.a_max));
        }
        if self.a_grid_size < 1 {
            return invalid("frequency grid must have at least one point");
        }
        if self.time_grid_size < 2 {
            return invalid("time grid must have at least two nodes");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrregularityEstimate {
    pub rho: f64,
    pub gamma: f64,
    pub norm_estimate: f64,
    pub a_max: f64,
    pub time_grid_size: usize,
    pub a_grid_size: usize,
    /// Frequency and time pair at which the supremum was attained.
    pub argmax_a: f64,
    pub argmax_interval: (f64, f64),
}

fn a_lower(a_max: f64) -> f64 {
    (a_max / 10.0).min(1.0)
}

/// Positive log-spaced frequencies from `min(1, a_max/10)` to `a_max`.
///
/// Grids of size `n` and `2n - 1` are nested: every point of the coarser grid
/// appears bit-for-bit in the finer one.
pub fn a_grid(a_max: f64, size: usize) -> Vec<f64> {
    let lo = a_lower(a_max);
    if size == 1 {
        return vec![a_max];
    }
    let ratio = a_max / lo;
    (0..size)
        .map(|k| {
            if k + 1 == size {
                a_max
            } else {
                lo * ratio.powf(k as f64 / (size - 1) as f64)
            }
        })
        .collect()
}

struct TimeGrid {
    times: Vec<f64>,
    /// `(t_j - t_i)^γ` for `i < j`, row-major.
    pow: Vec<f64>,
}

impl TimeGrid {
    fn new(horizon: f64, nodes: usize, gamma: f64) -> Self {
        let last = (nodes - 1) as f64;
        let times: Vec<f64> = (0..nodes).map(|i| i as f64 * horizon / last).collect();
        let mut pow = vec![0.0; nodes * nodes];
        for i in 0..nodes {
            for j in i + 1..nodes {
                pow[i * nodes + j] = (times[j] - times[i]).powf(gamma);
            }
        }
        Self { times, pow }
    }

    /// `sup_{i<j} |Φ_{t_j,t_i}(a)| / (t_j - t_i)^γ` and its argmax.
    fn scan(&self, path: &ModulationPath, a: f64) -> (f64, usize, usize) {
        let g = self.times.len();
        let prefix = path.node_prefix(a, path.horizon());
        let p: Vec<_> = self
            .times
            .iter()
            .map(|&t| path.prefix_at(&prefix, a, t))
            .collect();
        let mut best = (f64::NEG_INFINITY, 0, 1);
        for i in 0..g {
            for j in i + 1..g {
                let ratio = (p[j] - p[i]).norm() / self.pow[i * g + j];
                if ratio > best.0 {
                    best = (ratio, i, j);
                }
            }
        }
        best
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    // γ = 1 is admitted so the a = 0 ratio can be normalized to exactly 1.
    if !(gamma > 0.0 && gamma <= 1.0) {
        return invalid(format!("gamma must lie in (0, 1], got {gamma}"));
    }
    Ok(())
}

#[inline]
fn japanese(a: f64) -> f64 {
    (1.0 + a * a).sqrt()
}

/// Grid supremum of `⟨a⟩^ρ |Φ_{t,r}(a)| / (t - r)^γ`.
pub fn irregularity_norm(
    path: &ModulationPath,
    rho: f64,
    gamma: f64,
    a_max: f64,
    a_grid_size: usize,
    time_grid_size: usize,
) -> Result<IrregularityEstimate> {
    check_gamma(gamma)?;
    if !rho.is_finite() {
        return invalid("rho must be finite");
    }
    let grid = IrregularityGrid {
        a_max,
        a_grid_size,
        time_grid_size,
    };
    grid.validate()?;
    let positive = a_grid(a_max, a_grid_size);
    let mut freqs = Vec::with_capacity(2 * positive.len() + 1);
    freqs.push(0.0);
    for &a in &positive {
        freqs.push(a);
        freqs.push(-a);
    }
    let tg = TimeGrid::new(path.horizon(), time_grid_size, gamma);
    let scans: Vec<(f64, usize, usize)> =
        freqs.par_iter().map(|&a| tg.scan(path, a)).collect();

    let mut best = (f64::NEG_INFINITY, 0usize);
    for (idx, (&a, s)) in freqs.iter().zip(&scans).enumerate() {
        let v = japanese(a).powf(rho) * s.0;
        if v > best.0 {
            best = (v, idx);
        }
    }
    let (_, i, j) = scans[best.1];
    Ok(IrregularityEstimate {
        rho,
        gamma,
        norm_estimate: best.0,
        a_max,
        time_grid_size,
        a_grid_size,
        argmax_a: freqs[best.1],
        argmax_interval: (tg.times[i], tg.times[j]),
    })
}

/// Fitted decay exponent `ρ̂` on the default grid up to `a_max`.
pub fn estimate_rho(path: &ModulationPath, gamma: f64, a_max: f64) -> Result<f64> {
    estimate_rho_with(path, gamma, &IrregularityGrid::with_a_max(a_max))
}

/// Least-squares slope of `log sup_{r,t} |Φ_{t,r}(a)| / (t - r)^γ` against
/// `log ⟨a⟩` over grid frequencies `a ≥ 1`, returned as `max(0, -slope)`.
pub fn estimate_rho_with(
    path: &ModulationPath,
    gamma: f64,
    grid: &IrregularityGrid,
) -> Result<f64> {
    check_gamma(gamma)?;
    grid.validate()?;
    let freqs: Vec<f64> = a_grid(grid.a_max, grid.a_grid_size)
        .into_iter()
        .filter(|&a| a >= 1.0)
        .collect();
    if freqs.len() < 4 {
        return invalid(format!(
            "need at least 4 frequency cells with a >= 1 for the fit, got {}",
            freqs.len()
        ));
    }
    let tg = TimeGrid::new(path.horizon(), grid.time_grid_size, gamma);
    let sups: Vec<f64> = freqs.par_iter().map(|&a| tg.scan(path, a).0).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = freqs
        .iter()
        .zip(&sups)
        .filter(|(_, &s)| s > 0.0)
        .map(|(&a, &s)| (japanese(a).ln(), s.ln()))
        .unzip();
    if xs.len() < 4 {
        return invalid("fewer than 4 frequency cells with a nonzero supremum");
    }
    let slope = crate::diagnostics::least_squares_slope(&xs, &ys);
    Ok((-slope).max(0.0))
}
