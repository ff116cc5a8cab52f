use num_complex::Complex64 as C64;

use super::Trajectory;
use crate::error::{invalid, Result};
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeDirection {
    /// `u -> v = e^{2iμt} u`, after which `v` solves the renormalized
    /// equation with nonlinearity `(|v|² - 2μ) v`.
    Forward,
    /// `v -> u = e^{-2iμt} v`.
    Inverse,
}

fn factor(mass: f64, t: f64, direction: GaugeDirection) -> Result<C64> {
    if !(mass >= 0.0 && mass.is_finite()) {
        return invalid(format!("mass must be non-negative, got {mass}"));
    }
    let sign = match direction {
        GaugeDirection::Forward => 1.0,
        GaugeDirection::Inverse => -1.0,
    };
    Ok(C64::from_polar(1.0, sign * 2.0 * mass * t))
}

/// Multiplies a field at time `t` by the gauge phase for mass
/// `μ = Σ |c_n|²`.
pub fn gauge_field(
    field: &SpectralField,
    mass: f64,
    t: f64,
    direction: GaugeDirection,
) -> Result<SpectralField> {
    let z = factor(mass, t, direction)?;
    Ok(field.scale(z))
}

/// Applies [`gauge_field`] at every node.
pub fn gauge_trajectory(traj: &Trajectory, mass: f64, direction: GaugeDirection) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(traj.len());
    for (s, &t) in traj.states().iter().zip(traj.times()) {
        states.push(gauge_field(s, mass, t, direction)?);
    }
    let mut out = Trajectory::new(traj.context().clone(), traj.times().to_vec(), states, traj.representation())?;
    out.quadrature = traj.quadrature();
    out.picard_iterations = traj.picard_iterations;
    out.picard_residual = traj.picard_residual;
    Ok(out)
}
