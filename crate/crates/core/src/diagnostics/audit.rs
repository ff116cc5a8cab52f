use super::least_squares_slope;
use crate::error::{invalid, Result};
use crate::solvers::{Representation, Trajectory};
use crate::spectral::SpectralField;

/// `(max_k |c_0(t_k)|, max_k |‖u(t_k)‖² - ‖u(t_0)‖²| / ‖u(t_0)‖²)` with
/// `0/0 := 0`.
pub fn conservation_audit(traj: &Trajectory) -> (f64, f64) {
    let m0 = traj.states()[0].mass();
    let mut mean = 0.0f64;
    let mut drift = 0.0f64;
    for s in traj.states() {
        mean = mean.max(s.get(0).norm());
        let d = (s.mass() - m0).abs();
        let rel = if d == 0.0 { 0.0 } else { d / m0 };
        drift = drift.max(rel);
    }
    (mean, drift)
}

/// `u(t_k) - u0` at every node of an interaction-representation trajectory.
pub fn smoothing_residual(traj: &Trajectory, u0: &SpectralField) -> Result<Trajectory> {
    if traj.representation() != Representation::Interaction {
        return invalid("smoothing residual needs an interaction-representation trajectory");
    }
    traj.states()[0].same_band(u0)?;
    let states = traj.states().iter().map(|s| s - u0).collect();
    Trajectory::new(traj.context().clone(), traj.times().to_vec(), states, Representation::Interaction)
}

/// `-slope` of `log |c_n|` against `log |n|` over dyadic shells
/// `[2^j, 2^{j+1})` intersected with `band`, using the geometric mean of the
/// nonzero `|c_n|` (both signs of `n`) in each shell. Needs at least 4
/// nonempty shells.
pub fn fitted_decay_exponent(field: &SpectralField, band: (usize, usize)) -> Result<f64> {
    let (lo, hi) = band;
    if lo < 1 || hi > field.max_mode() || lo > hi {
        return invalid(format!("decay band [{lo}, {hi}] must lie within [1, {}]", field.max_mode()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut start = 1usize;
    while start <= hi {
        let end = (2 * start - 1).min(hi);
        let (mut sx, mut sy, mut count) = (0.0, 0.0, 0usize);
        for n in start.max(lo)..=end {
            for c in [field.get(n as i64), field.get(-(n as i64))] {
                let a = c.norm();
                if a > 0.0 {
                    sx += (n as f64).ln();
                    sy += a.ln();
                    count += 1;
                }
            }
        }
        if count > 0 {
            xs.push(sx / count as f64);
            ys.push(sy / count as f64);
        }
        start *= 2;
    }
    if xs.is_empty() {
        return invalid("decay band holds only zero coefficients");
    }
    if xs.len() < 4 {
        return invalid(format!("decay fit needs at least 4 nonempty dyadic shells, got {}", xs.len()));
    }
    Ok(-least_squares_slope(&xs, &ys))
}
