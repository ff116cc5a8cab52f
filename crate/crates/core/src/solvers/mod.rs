//! Time integration in interaction variables.
//!
//! * [`solve_normal_form`]: Picard iteration on the normal-form integral
//!   equation, evaluated with prefix tables of phase integrals so one sweep
//!   costs `O(K · stencil)`.
//! * [`solve_mild_riemann`]: explicit Riemann sums of the driver
//!   (first-order exponential integrator).
//! * [`solve_euler_corrected`]: Riemann steps plus the frozen-state normal
//!   form correction.
//!
//! The cubic NLS is always solved for the gauged variable `v`; see
//! [`gauge_field`].

mod cell;
mod gauge;
mod increment;
mod io;
mod normal_form;
mod riemann;

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::operators::OperatorContext;
use crate::spectral::{Constraints, SpectralField};

pub use cell::cell_integral;
pub use gauge::{gauge_field, gauge_trajectory, GaugeDirection};
pub use increment::{
    increment_identity_sweep, increment_quadrature_estimate, increment_residual, verify_increment_identity,
    IncrementCheck,
};
pub use io::{read_trajectory_manifest, write_trajectory, ManifestEntry, MANIFEST_NAME};
pub use normal_form::{solve_normal_form, solve_normal_form_halving};
pub use riemann::{corrected_step, riemann_step, solve_euler_corrected, solve_mild_riemann};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Left,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    NormalForm,
    RiemannMild,
    EulerExponential,
    EulerCorrected,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Self::NormalForm => "normal_form",
            Self::RiemannMild => "riemann_mild",
            Self::EulerExponential => "euler_exponential",
            Self::EulerCorrected => "euler_corrected",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "normal_form" => Ok(Self::NormalForm),
            "riemann_mild" => Ok(Self::RiemannMild),
            "euler_exponential" => Ok(Self::EulerExponential),
            "euler_corrected" => Ok(Self::EulerCorrected),
            other => invalid(format!("unknown scheme '{other}'")),
        }
    }
}

impl FromStr for Quadrature {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "left" => Ok(Self::Left),
            "trapezoid" => Ok(Self::Trapezoid),
            other => invalid(format!("unknown quadrature '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub step_count: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub quadrature: Quadrature,
    pub scheme: Scheme,
    /// Substeps of the correction quadrature in [`corrected_step`].
    pub substeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step_count: 32,
            picard_tol: 1e-10,
            picard_max_iter: 100,
            quadrature: Quadrature::Trapezoid,
            scheme: Scheme::NormalForm,
            substeps: 4,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.step_count == 0 {
            return invalid("step_count must be at least 1");
        }
        if !(self.picard_tol > 0.0 && self.picard_tol.is_finite()) {
            return invalid(format!("picard_tol must be positive, got {}", self.picard_tol));
        }
        if self.picard_max_iter == 0 {
            return invalid("picard_max_iter must be at least 1");
        }
        if self.substeps == 0 {
            return invalid("substeps must be at least 1");
        }
        Ok(())
    }

    pub fn with_steps(&self, step_count: usize) -> Self {
        Self { step_count, ..self.clone() }
    }

    pub fn with_scheme(&self, scheme: Scheme) -> Self {
        Self { scheme, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Interaction,
    Physical,
}

/// States on the node grid `t_k = k τ / K`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<SpectralField>,
    ctx: OperatorContext,
    representation: Representation,
    quadrature: Quadrature,
    /// Picard sweeps used (0 for explicit schemes).
    pub picard_iterations: usize,
    /// Last sup-over-nodes Picard update norm (0 for explicit schemes).
    pub picard_residual: f64,
}

impl Trajectory {
    pub fn new(
        ctx: OperatorContext,
        times: Vec<f64>,
        states: Vec<SpectralField>,
        representation: Representation,
    ) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return invalid("a trajectory needs one state per node and at least one node");
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("trajectory times must be increasing");
        }
        ctx.check_band(&states.iter().collect::<Vec<_>>())?;
        Ok(Self {
            times,
            states,
            ctx,
            representation,
            quadrature: Quadrature::Trapezoid,
            picard_iterations: 0,
            picard_residual: 0.0,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[SpectralField] {
        &self.states
    }

    pub fn context(&self) -> &OperatorContext {
        &self.ctx
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn quadrature(&self) -> Quadrature {
        self.quadrature
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &SpectralField {
        self.states.last().expect("trajectory is non-empty")
    }

    /// Index of the node at time `t`, allowing for round-off.
    pub fn node_index(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * self.times.last().copied().unwrap_or(1.0).abs().max(1.0);
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .ok_or_else(|| Error::InvalidArgument(format!("time {t} is not a trajectory node")))
    }

    fn convert(&self, target: Representation) -> Result<Self> {
        if self.representation == target {
            return Ok(self.clone());
        }
        let inverse = target == Representation::Interaction;
        let symbol = self.ctx.symbol();
        let mut states = Vec::with_capacity(self.states.len());
        for (s, &t) in self.states.iter().zip(&self.times) {
            let w = self.ctx.path().value_at(t)?;
            states.push(s.propagate(&symbol, w, inverse));
        }
        Ok(Self { states, representation: target, ..self.clone() })
    }

    /// Applies `U(t_k)` to every node.
    pub fn to_physical(&self) -> Result<Self> {
        self.convert(Representation::Physical)
    }

    /// Applies `U(t_k)^{-1}` to every node.
    pub fn to_interaction(&self) -> Result<Self> {
        self.convert(Representation::Interaction)
    }

    /// Sup over common nodes of the L² distance to another trajectory.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        if self.times.len() != other.times.len() {
            return invalid("trajectories have different node counts");
        }
        Ok(self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (a - b).l2_norm())
            .fold(0.0, f64::max))
    }
}

/// Checks shared by all solvers; returns the node grid and the constraints
/// that every state must carry.
pub(crate) fn prepare(
    ctx: &OperatorContext,
    u0: &SpectralField,
    tau: f64,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, Constraints)> {
    cfg.validate()?;
    ctx.check_band(&[u0])?;
    let horizon = ctx.path().horizon();
    if !(tau > 0.0 && tau <= horizon * (1.0 + 1e-12)) {
        return invalid(format!("tau must lie in (0, {horizon}], got {tau}"));
    }
    let eq = ctx.equation();
    if eq.requires_mean_zero() && u0.get(0).norm() != 0.0 {
        return invalid(format!("{eq} needs mean-zero data, got c_0 = {}", u0.get(0)));
    }
    let k = cfg.step_count;
    let times: Vec<f64> = (0..=k).map(|j| (j as f64 * tau / k as f64).min(horizon)).collect();
    let constraints = Constraints {
        mean_zero: eq.requires_mean_zero(),
        real_valued: eq.preserves_reality() && u0.real_valued(),
    };
    if constraints.real_valued {
        u0.check_constraints(0.0)?;
    }
    Ok((times, constraints))
}

/// Re-imposes exact structure after a nonlinear update.
pub(crate) fn enforce(field: SpectralField, constraints: Constraints) -> SpectralField {
    if constraints.real_valued || constraints.mean_zero {
        field.project(constraints)
    } else {
        field.with_constraints(constraints)
    }
}

/// Dispatches on `cfg.scheme`.
pub fn solve(
    ctx: &OperatorContext,
    u0: &SpectralField,
    tau: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    match cfg.scheme {
        Scheme::NormalForm => solve_normal_form(ctx, u0, tau, cfg),
        Scheme::RiemannMild | Scheme::EulerExponential => solve_mild_riemann(ctx, u0, tau, cfg),
        Scheme::EulerCorrected => solve_euler_corrected(ctx, u0, tau, cfg),
    }
}
