use super::cell::cell_integral;
use super::{enforce, prepare, Quadrature, Representation, SolverConfig, Trajectory};
use crate::error::{invalid, Result};
use crate::operators::{resonant_cubic, OperatorContext};
use crate::spectral::{EquationKind, SpectralField};

/// Increment of the driver over `[r, t]` evaluated at `u`: the quadratic
/// driver, or for the cubic NLS the non-resonant driver plus the left-point
/// resonant integral.
fn driver_increment(ctx: &OperatorContext, r: f64, t: f64, u: &SpectralField) -> Result<SpectralField> {
    if ctx.equation() == EquationKind::Nls {
        let x = ctx.trilinear_nonresonant_nls(r, t, u, u, u)?;
        let res = resonant_cubic(u, u, u)?;
        Ok(&x + &(&res * (t - r)))
    } else {
        ctx.bilinear_driver(r, t, u, u)
    }
}

/// One Riemann step `u + X_{t_{k+1}, t_k}(u)`.
pub fn riemann_step(ctx: &OperatorContext, tk: f64, tk1: f64, u: &SpectralField) -> Result<SpectralField> {
    if tk1 < tk {
        return invalid(format!("step needs t_k <= t_(k+1), got {tk} > {tk1}"));
    }
    Ok(u + &driver_increment(ctx, tk, tk1, u)?)
}

/// Riemann step plus the frozen-state correction
/// `∫_{t_k}^{t_{k+1}} 𝒩_{t_{k+1},s}(u) ds`, evaluated with the trapezoid cell
/// rule on `substeps` equal cells.
pub fn corrected_step(
    ctx: &OperatorContext,
    tk: f64,
    tk1: f64,
    u: &SpectralField,
    substeps: usize,
) -> Result<SpectralField> {
    if !(tk < tk1) {
        return invalid(format!("corrected step needs t_k < t_(k+1), got {tk}, {tk1}"));
    }
    if substeps == 0 {
        return invalid("substeps must be at least 1");
    }
    let mut out = riemann_step(ctx, tk, tk1, u)?;
    let h = (tk1 - tk) / substeps as f64;
    for i in 0..substeps {
        let s0 = tk + i as f64 * h;
        let s1 = if i + 1 == substeps { tk1 } else { s0 + h };
        let part = cell_integral(ctx, s0, s1, tk1, u, u, Quadrature::Trapezoid)?;
        out = &out + &part;
    }
    Ok(out)
}

fn march(
    ctx: &OperatorContext,
    u0: &SpectralField,
    tau: f64,
    cfg: &SolverConfig,
    step: impl Fn(f64, f64, &SpectralField) -> Result<SpectralField>,
) -> Result<Trajectory> {
    let (times, constraints) = prepare(ctx, u0, tau, cfg)?;
    let mut states = Vec::with_capacity(times.len());
    states.push(enforce(u0.clone(), constraints));
    for k in 0..times.len() - 1 {
        let next = step(times[k], times[k + 1], &states[k])?;
        states.push(enforce(next, constraints));
    }
    let mut traj = Trajectory::new(ctx.clone(), times, states, Representation::Interaction)?;
    traj.quadrature = cfg.quadrature;
    Ok(traj)
}

/// Explicit Riemann sums `u_{k+1} = u_k + X_{t_{k+1}, t_k}(u_k)`; this is
/// also the first-order exponential integrator.
pub fn solve_mild_riemann(
    ctx: &OperatorContext,
    u0: &SpectralField,
    tau: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    march(ctx, u0, tau, cfg, |a, b, u| riemann_step(ctx, a, b, u))
}

/// March with [`corrected_step`].
pub fn solve_euler_corrected(
    ctx: &OperatorContext,
    u0: &SpectralField,
    tau: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    march(ctx, u0, tau, cfg, |a, b, u| corrected_step(ctx, a, b, u, cfg.substeps))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::modulation::generate_fbm;
    use crate::spectral::{random_field, Constraints, Profile};

    fn ctx(eq: EquationKind, n: usize) -> OperatorContext {
        let path = generate_fbm(0.3, 0.05, 257, 5).unwrap();
        OperatorContext::new(eq, Arc::new(path), n).unwrap()
    }

    #[test]
    fn single_step_is_the_driver() {
        let c = ctx(EquationKind::Kdv, 8);
        let u0 = random_field(8, Profile::White, 2, Constraints::REAL_MEAN_ZERO).unwrap();
        let cfg = SolverConfig::default().with_steps(1);
        let traj = solve_mild_riemann(&c, &u0, 0.05, &cfg).unwrap();
        let expected = &u0 + &c.bilinear_driver(0.0, 0.05, &u0, &u0).unwrap();
        assert!(traj.final_state().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn zero_data_stays_zero() {
        for eq in [EquationKind::Kdv, EquationKind::Nls] {
            let c = ctx(eq, 4);
            let u0 = SpectralField::zeros(4, Constraints::MEAN_ZERO);
            let cfg = SolverConfig::default().with_steps(4);
            assert!(solve_mild_riemann(&c, &u0, 0.05, &cfg).unwrap().final_state().is_zero());
            assert!(solve_euler_corrected(&c, &u0, 0.05, &cfg).unwrap().final_state().is_zero());
        }
    }

    #[test]
    fn corrected_step_nests_riemann_step() {
        let c = ctx(EquationKind::BenjaminOno, 6);
        let z = SpectralField::zeros(6, Constraints::MEAN_ZERO);
        assert!(corrected_step(&c, 0.01, 0.02, &z, 3).unwrap().is_zero());
        let u = random_field(6, Profile::White, 9, Constraints::REAL_MEAN_ZERO).unwrap();
        let plain = riemann_step(&c, 0.01, 0.02, &u).unwrap();
        let corr = corrected_step(&c, 0.01, 0.02, &u, 4).unwrap();
        let correction = &corr - &plain;
        assert!(correction.l2_norm() > 0.0);
        let mut q = SpectralField::zeros(6, Constraints::MEAN_ZERO);
        let h = (0.02 - 0.01) / 4.0;
        for i in 0..4 {
            let s = 0.01 + i as f64 * h;
            q = &q + &cell_integral(&c, s, (s + h).min(0.02), 0.02, &u, &u, Quadrature::Trapezoid).unwrap();
        }
        assert!(correction.max_abs_diff(&q) < 1e-15);
    }

    #[test]
    fn more_substeps_change_the_correction_less() {
        let c = ctx(EquationKind::Kdv, 8);
        let u = random_field(8, Profile::White, 4, Constraints::REAL_MEAN_ZERO).unwrap();
        let steps: Vec<SpectralField> =
            [1, 4, 16, 64].iter().map(|&m| corrected_step(&c, 0.0, 0.05, &u, m).unwrap()).collect();
        let gaps: Vec<f64> = steps.windows(2).map(|w| w[1].max_abs_diff(&w[0])).collect();
        assert!(gaps.windows(2).all(|g| g[1] < g[0]), "{gaps:?}");
    }

    #[test]
    fn corrected_step_rejects_empty_interval() {
        let c = ctx(EquationKind::Kdv, 4);
        let u = SpectralField::zeros(4, Constraints::MEAN_ZERO);
        assert!(corrected_step(&c, 0.02, 0.02, &u, 2).is_err());
        assert!(corrected_step(&c, 0.01, 0.02, &u, 0).is_err());
    }
}
