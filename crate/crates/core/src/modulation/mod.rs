//! Rough modulation paths and their oscillatory phase integrals.
//!
//! A path is stored as uniform samples `w_0 = 0, w_1, ..., w_M` on `[0, T]` and
//! is interpolated linearly between nodes. On each segment the phase
//! `a * w(t)` is linear in `t`, so `∫ exp(i a w(t)) dt` has a closed form and
//! the phase integral is exact up to round-off.

mod fbm;
mod io;
mod irregularity;

use num_complex::Complex64 as C64;

use crate::error::{invalid, Result};

pub use fbm::generate_fbm;
pub use irregularity::{
    a_grid, estimate_rho, estimate_rho_with, irregularity_norm, IrregularityEstimate,
    IrregularityGrid,
};

/// Below this value of `|a Δw|` the segment factor `(e^{iθ} - 1)/(iθ)` is
/// evaluated from its Taylor expansion.
pub const SERIES_SWITCH: f64 = 1e-6;

/// Relative slack accepted when a caller passes a time a hair past the horizon
/// (e.g. `k * tau / K` rounding up).
const TIME_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ModulationPath {
    horizon: f64,
    values: Vec<f64>,
}

/// `(e^{iθ} - 1) / (iθ)` without cancellation.
#[inline]
pub(crate) fn segment_factor(theta: f64) -> C64 {
    if theta.abs() < SERIES_SWITCH {
        let t2 = theta * theta;
        C64::new(1.0 - t2 / 6.0, theta / 2.0 - theta * t2 / 24.0)
    } else {
        let half = 0.5 * theta;
        let s = half.sin();
        C64::new(theta.sin() / theta, 2.0 * s * s / theta)
    }
}

#[inline]
fn cis(x: f64) -> C64 {
    let (s, c) = x.sin_cos();
    C64::new(c, s)
}

impl ModulationPath {
    /// Builds a path from raw samples at uniform nodes, shifting so that the
    /// first sample is zero.
    pub fn from_samples(values: &[f64], horizon: f64) -> Result<Self> {
        if values.len() < 2 {
            return invalid(format!("a path needs at least 2 samples, got {}", values.len()));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return invalid(format!("horizon must be positive and finite, got {horizon}"));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("sample {bad} is not finite"));
        }
        let w0 = values[0];
        Ok(Self {
            horizon,
            values: values.iter().map(|v| v - w0).collect(),
        })
    }

    /// The path `w(t) = slope * t` sampled at `sample_count` nodes.
    pub fn linear(slope: f64, horizon: f64, sample_count: usize) -> Result<Self> {
        if sample_count < 2 {
            return invalid("a path needs at least 2 samples");
        }
        let m = (sample_count - 1) as f64;
        let values: Vec<f64> = (0..sample_count)
            .map(|k| slope * (k as f64 * horizon / m))
            .collect();
        Self::from_samples(&values, horizon)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sample_count(&self) -> usize {
        self.values.len()
    }

    pub fn segment_count(&self) -> usize {
        self.values.len() - 1
    }

    /// Time of node `k`.
    #[inline]
    pub fn node_time(&self, k: usize) -> f64 {
        k as f64 * self.horizon / self.segment_count() as f64
    }

    fn clamp_time(&self, t: f64) -> Result<f64> {
        let slack = TIME_SLACK * self.horizon;
        if !t.is_finite() || t < -slack || t > self.horizon + slack {
            return invalid(format!("time {t} outside [0, {}]", self.horizon));
        }
        Ok(t.clamp(0.0, self.horizon))
    }

    /// Segment containing `t`, with the right endpoint attached to the last
    /// segment.
    #[inline]
    fn segment_of(&self, t: f64) -> usize {
        let m = self.segment_count();
        let x = t * m as f64 / self.horizon;
        (x.floor() as usize).min(m - 1)
    }

    /// Linear interpolant `w(t)`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let t = self.clamp_time(t)?;
        Ok(self.interp(t))
    }

    #[inline]
    fn interp(&self, t: f64) -> f64 {
        let j = self.segment_of(t);
        self.interp_in(j, t)
    }

    #[inline]
    fn interp_in(&self, j: usize, t: f64) -> f64 {
        let t0 = self.node_time(j);
        let t1 = self.node_time(j + 1);
        let (w0, w1) = (self.values[j], self.values[j + 1]);
        if t == t1 {
            return w1;
        }
        w0 + (w1 - w0) * ((t - t0) / (t1 - t0))
    }

    /// `∫_{lo}^{hi} e^{i a w(s)} ds` for `lo <= hi` inside segment `j`.
    #[inline]
    fn partial(&self, j: usize, lo: f64, hi: f64, a: f64) -> C64 {
        if hi <= lo {
            return C64::new(0.0, 0.0);
        }
        let wl = self.interp_in(j, lo);
        let wh = self.interp_in(j, hi);
        cis(a * wl) * segment_factor(a * (wh - wl)) * (hi - lo)
    }

    /// The phase integral `Φ_{t,r}(a) = ∫_r^t exp(i a w(s)) ds`.
    pub fn phase_integral(&self, r: f64, t: f64, a: f64) -> Result<C64> {
        let r = self.clamp_time(r)?;
        let t = self.clamp_time(t)?;
        if r > t {
            return invalid(format!("phase integral needs r <= t, got r={r}, t={t}"));
        }
        Ok(self.phase_unchecked(r, t, a))
    }

    pub(crate) fn phase_unchecked(&self, r: f64, t: f64, a: f64) -> C64 {
        if t <= r {
            return C64::new(0.0, 0.0);
        }
        let jr = self.segment_of(r);
        let jt = self.segment_of(t);
        if jr == jt {
            return self.partial(jr, r, t, a);
        }
        let mut acc = self.partial(jr, r, self.node_time(jr + 1), a);
        for j in jr + 1..jt {
            acc += self.full_segment(j, a);
        }
        acc + self.partial(jt, self.node_time(jt), t, a)
    }

    #[inline]
    fn full_segment(&self, j: usize, a: f64) -> C64 {
        let h = self.node_time(j + 1) - self.node_time(j);
        let dw = self.values[j + 1] - self.values[j];
        cis(a * self.values[j]) * segment_factor(a * dw) * h
    }

    /// Cumulative node integrals `Φ_{t_j, 0}(a)` for `j = 0..=last`, where
    /// `last` is the node index at or after `t_end`.
    pub(crate) fn node_prefix(&self, a: f64, t_end: f64) -> Vec<C64> {
        let last = (self.segment_of(t_end.min(self.horizon)) + 1).min(self.segment_count());
        let mut out = Vec::with_capacity(last + 1);
        let mut acc = C64::new(0.0, 0.0);
        out.push(acc);
        for j in 0..last {
            acc += self.full_segment(j, a);
            out.push(acc);
        }
        out
    }

    /// `Φ_{t,0}(a)` from a node prefix produced by [`Self::node_prefix`].
    ///
    /// Depends only on `t` and the prefix, so nested time grids see identical
    /// values at shared nodes.
    #[inline]
    pub(crate) fn prefix_at(&self, prefix: &[C64], a: f64, t: f64) -> C64 {
        let j = self.segment_of(t);
        prefix[j] + self.partial(j, self.node_time(j), t, a)
    }

    /// `Φ_{t_k, 0}(a)` on an arbitrary increasing grid of times.
    pub fn phase_on_grid(&self, a: f64, times: &[f64]) -> Result<Vec<C64>> {
        let mut clamped = Vec::with_capacity(times.len());
        for &t in times {
            clamped.push(self.clamp_time(t)?);
        }
        if clamped.windows(2).any(|p| p[1] < p[0]) {
            return invalid("time grid must be non-decreasing");
        }
        let t_end = clamped.last().copied().unwrap_or(0.0);
        let prefix = self.node_prefix(a, t_end);
        Ok(clamped
            .iter()
            .map(|&t| self.prefix_at(&prefix, a, t))
            .collect())
    }
}

pub use io::{read_path, write_path};

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn from_samples_normalizes() {
        let p = ModulationPath::from_samples(&[3.0, 4.0, 5.0], 1.0).unwrap();
        assert_eq!(p.values(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn from_samples_rejects_short_and_nonfinite() {
        assert!(ModulationPath::from_samples(&[0.0], 1.0).is_err());
        assert!(ModulationPath::from_samples(&[0.0, f64::NAN], 1.0).is_err());
        assert!(ModulationPath::from_samples(&[0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn two_sample_path_endpoint() {
        let p = ModulationPath::from_samples(&[0.0, 1.0], 2.0).unwrap();
        assert_eq!(p.value_at(2.0).unwrap(), 1.0);
        assert_eq!(p.value_at(1.0).unwrap(), 0.5);
    }

    #[test]
    fn zero_frequency_is_interval_length() {
        let p = ModulationPath::from_samples(&[0.0, 0.3, -1.2, 0.7, 0.1], 1.0).unwrap();
        let phi = p.phase_integral(0.1, 0.85, 0.0).unwrap();
        assert!((phi.re - 0.75).abs() < 1e-15);
        assert_eq!(phi.im, 0.0);
    }

    #[test]
    fn full_period_cancels() {
        let p = ModulationPath::linear(1.0, 1.0, 2).unwrap();
        let phi = p.phase_integral(0.0, 1.0, 2.0 * PI).unwrap();
        assert!(phi.norm() < 1e-15, "{phi}");
    }

    #[test]
    fn series_branch_matches_closed_form_near_switch() {
        let theta = SERIES_SWITCH * 0.999;
        let series = segment_factor(theta);
        let theta2 = SERIES_SWITCH * 1.001;
        let closed = segment_factor(theta2);
        assert!((series - closed).norm() < 1e-8);
        let s = (0.5 * theta).sin();
        let exact = C64::new(theta.sin() / theta, 2.0 * s * s / theta);
        assert!((series - exact).norm() < 1e-15);
    }

    #[test]
    fn out_of_range_times_rejected() {
        let p = ModulationPath::linear(1.0, 1.0, 3).unwrap();
        assert!(p.phase_integral(-0.1, 0.5, 1.0).is_err());
        assert!(p.phase_integral(0.5, 1.5, 1.0).is_err());
        assert!(p.phase_integral(0.6, 0.5, 1.0).is_err());
    }

    #[test]
    fn grid_prefix_matches_direct() {
        let vals: Vec<f64> = (0..40).map(|k| (k as f64 * 0.37).sin() * 2.0).collect();
        let p = ModulationPath::from_samples(&vals, 0.5).unwrap();
        let times = [0.0, 0.013, 0.2, 0.31, 0.5];
        let pre = p.phase_on_grid(17.0, &times).unwrap();
        for (k, &t) in times.iter().enumerate() {
            let direct = p.phase_integral(0.0, t, 17.0).unwrap();
            assert!((pre[k] - direct).norm() < 1e-14);
        }
    }
}
