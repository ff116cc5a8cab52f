//! Picard iteration for the normal-form integral equation
//!
//! `u(t_k) = u0 + X_{t_k,0}(u0) + Σ_{j<k} Cell_j[𝒩_{t_k,·}(u)]`
//!
//! (plus the resonant integral for the cubic NLS), with the cell rule of
//! [`cell`](super::cell). The outer weight of every term is
//! `Φ_{t_k,s}(Ξ) = P_k(Ξ) - P(s)(Ξ)` with `P_k(Ξ) = Φ_{t_k,0}(Ξ)`, so for each
//! stencil term the sum over cells splits into `P_k · Σ_j c_j - Σ_j P̄_j c_j`.
//! Both running sums are updated once per cell, which makes a sweep linear
//! in `K`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::cell::{self, GridPhases};
use super::{enforce, prepare, Quadrature, Representation, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::operators::{OperatorContext, Stencil};
use crate::spectral::{Constraints, EquationKind, SpectralField};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Update norms beyond this multiple of `1 + |u0|` are treated as divergence.
const DIVERGENCE_FACTOR: f64 = 1e6;

struct Kernel<'a> {
    ctx: &'a OperatorContext,
    st: &'a Stencil,
    nls: bool,
    rule: Quadrature,
    times: Vec<f64>,
    grid: GridPhases,
    /// Node weights of the resonant NLS integral over `[0, t_k]`, `j < k`.
    omega: Vec<f64>,
    /// Weight of the right endpoint in the resonant integral.
    endpoint: Vec<f64>,
    out_mult: Vec<C64>,
    u0: Vec<C64>,
    boundary: Vec<Vec<C64>>,
    constraints: Constraints,
}

impl<'a> Kernel<'a> {
    fn new(
        ctx: &'a OperatorContext,
        u0: &SpectralField,
        times: Vec<f64>,
        rule: Quadrature,
        constraints: Constraints,
    ) -> Self {
        let nls = ctx.equation() == EquationKind::Nls;
        let grid = GridPhases::new(ctx, &times);
        let kk = times.len() - 1;
        let mut omega = vec![0.0; kk + 1];
        let mut endpoint = vec![0.0; kk + 1];
        for j in 0..kk {
            let right = times[j + 1] - times[j];
            match rule {
                Quadrature::Left => omega[j] = right,
                Quadrature::Trapezoid => {
                    let left = if j == 0 { 0.0 } else { times[j] - times[j - 1] };
                    omega[j] = 0.5 * (left + right);
                    endpoint[j + 1] = 0.5 * right;
                }
            }
        }
        let mut kernel = Self {
            ctx,
            st: cell::stencil(ctx),
            nls,
            rule,
            times,
            grid,
            omega,
            endpoint,
            out_mult: cell::output_multipliers(ctx),
            u0: u0.coeffs().to_vec(),
            boundary: Vec::new(),
            constraints,
        };
        kernel.boundary = kernel.boundary_terms();
        kernel
    }

    /// `X_{t_k,0}(u0)` for every node.
    fn boundary_terms(&self) -> Vec<Vec<C64>> {
        let st = self.st;
        let u = &self.u0;
        let products: Vec<C64> = (0..st.len())
            .map(|j| {
                let (a, b, c) = (st.a[j] as usize, st.b[j] as usize, st.c[j] as usize);
                if self.nls {
                    -I * u[a] * u[b].conj() * u[c]
                } else {
                    u[a] * u[b]
                }
            })
            .collect();
        let mult = if self.nls {
            vec![C64::new(1.0, 0.0); st.outputs()]
        } else {
            self.ctx.multipliers()
        };
        (0..self.times.len())
            .into_par_iter()
            .map(|k| {
                let pk = self.grid.prefix(k);
                (0..st.outputs())
                    .map(|i| {
                        let mut acc = C64::new(0.0, 0.0);
                        for j in st.offsets[i]..st.offsets[i + 1] {
                            acc += pk[st.key[j] as usize] * products[j];
                        }
                        mult[i] * acc
                    })
                    .collect()
            })
            .collect()
    }

    fn resonant(u: &[C64]) -> Vec<C64> {
        u.iter().map(|v| I * v * v.conj() * v).collect()
    }

    /// One Jacobi sweep: every node is recomputed from `prev`.
    fn sweep(&self, prev: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let st = self.st;
        let terms = st.len();
        let mut s = vec![C64::new(0.0, 0.0); terms];
        let mut q = vec![C64::new(0.0, 0.0); terms];
        let len = self.u0.len();
        let mut local = vec![C64::new(0.0, 0.0); len];
        let mut out = Vec::with_capacity(self.times.len());
        out.push(self.u0.clone());
        for k in 1..self.times.len() {
            let j = k - 1;
            let inner = self.grid.cell(j);
            let width = self.times[k] - self.times[j];
            let (uj, uk) = (&prev[j], &prev[k]);
            let gl = cell::aux(self.ctx, uj, inner, width);
            let (pj, pk) = (self.grid.prefix(j), self.grid.prefix(k));
            match self.rule {
                Quadrature::Left => {
                    for t in 0..terms {
                        let coef = cell::term(st, self.nls, t, &gl, uj);
                        s[t] += coef;
                        q[t] += pj[st.key[t] as usize] * coef;
                    }
                }
                Quadrature::Trapezoid => {
                    let gr = cell::aux(self.ctx, uk, inner, width);
                    for t in 0..terms {
                        let coef = 0.5
                            * (cell::term(st, self.nls, t, &gl, uj) + cell::term(st, self.nls, t, &gr, uk));
                        let key = st.key[t] as usize;
                        s[t] += coef;
                        q[t] += 0.5 * (pj[key] + pk[key]) * coef;
                    }
                }
            }
            if self.nls {
                for (l, r) in local.iter_mut().zip(Self::resonant(uj)) {
                    *l += self.omega[j] * r;
                }
            }
            let mut next = vec![C64::new(0.0, 0.0); len];
            for (i, slot) in next.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for t in st.offsets[i]..st.offsets[i + 1] {
                    acc += pk[st.key[t] as usize] * s[t] - q[t];
                }
                *slot = self.u0[i] + self.boundary[k][i] + self.out_mult[i] * acc;
            }
            if self.nls {
                let end = Self::resonant(uk);
                for ((slot, l), e) in next.iter_mut().zip(&local).zip(end) {
                    *slot += l + self.endpoint[k] * e;
                }
            }
            out.push(self.enforce(next));
        }
        out
    }

    fn enforce(&self, coeffs: Vec<C64>) -> Vec<C64> {
        if !(self.constraints.real_valued || self.constraints.mean_zero) {
            return coeffs;
        }
        let mut f = SpectralField::zeros(self.ctx.max_mode(), Constraints::NONE);
        f.coeffs_mut().copy_from_slice(&coeffs);
        enforce(f, self.constraints).coeffs().to_vec()
    }
}

fn l2_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Solves the normal-form equation on `t_k = k τ / K` by Picard iteration
/// started from the constant path `u0`, stopping when the sup-over-nodes L²
/// update drops below `picard_tol`.
pub fn solve_normal_form(
    ctx: &OperatorContext,
    u0: &SpectralField,
    tau: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    let (times, constraints) = prepare(ctx, u0, tau, cfg)?;
    let u0 = enforce(u0.clone(), constraints);
    let kernel = Kernel::new(ctx, &u0, times.clone(), cfg.quadrature, constraints);
    let scale = 1.0 + u0.l2_norm();
    let mut states = vec![u0.coeffs().to_vec(); times.len()];
    let mut residual = f64::INFINITY;
    for iteration in 1..=cfg.picard_max_iter {
        let next = kernel.sweep(&states);
        residual = next
            .iter()
            .zip(&states)
            .map(|(a, b)| l2_diff(a, b))
            .fold(0.0, f64::max);
        states = next;
        if !residual.is_finite() || residual > DIVERGENCE_FACTOR * scale {
            return Err(Error::NonConvergence { iterations: iteration, residual });
        }
        if residual < cfg.picard_tol {
            let fields = states
                .into_iter()
                .map(|c| {
                    let mut f = SpectralField::zeros(ctx.max_mode(), constraints);
                    f.coeffs_mut().copy_from_slice(&c);
                    f
                })
                .collect();
            let mut traj = Trajectory::new(ctx.clone(), times, fields, Representation::Interaction)?;
            traj.quadrature = cfg.quadrature;
            traj.picard_iterations = iteration;
            traj.picard_residual = residual;
            return Ok(traj);
        }
    }
    Err(Error::NonConvergence { iterations: cfg.picard_max_iter, residual })
}

/// Retries [`solve_normal_form`] with `τ` halved (same step count) up to 8
/// times on non-convergence. Returns the trajectory and the `τ` used.
pub fn solve_normal_form_halving(
    ctx: &OperatorContext,
    u0: &SpectralField,
    tau: f64,
    cfg: &SolverConfig,
) -> Result<(Trajectory, f64)> {
    let mut tau = tau;
    let mut last = None;
    for _ in 0..=8 {
        match solve_normal_form(ctx, u0, tau, cfg) {
            Ok(traj) => return Ok((traj, tau)),
            Err(e @ Error::NonConvergence { .. }) => {
                last = Some(e);
                tau *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::modulation::{generate_fbm, ModulationPath};
    use crate::spectral::{random_field, Profile};

    fn ctx(eq: EquationKind, n: usize) -> OperatorContext {
        let path = generate_fbm(0.3, 0.05, 513, 11).unwrap();
        OperatorContext::new(eq, Arc::new(path), n).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let c = ctx(EquationKind::Kdv, 6);
        let u0 = SpectralField::zeros(6, Constraints::REAL_MEAN_ZERO);
        let traj = solve_normal_form(&c, &u0, 0.05, &SolverConfig::default()).unwrap();
        assert!(traj.states().iter().all(|s| s.is_zero()));
        assert_eq!(traj.len(), 33);
    }

    #[test]
    fn rejects_nonzero_mean_and_long_tau() {
        let c = ctx(EquationKind::Kdv, 4);
        let u0 = SpectralField::delta(4, 0, C64::new(1.0, 0.0)).unwrap();
        assert!(solve_normal_form(&c, &u0, 0.05, &SolverConfig::default()).is_err());
        let u0 = SpectralField::delta(4, 1, C64::new(1.0, 0.0)).unwrap();
        assert!(solve_normal_form(&c, &u0, 0.2, &SolverConfig::default()).is_err());
    }

    #[test]
    fn kernel_matches_operator_sum_after_one_sweep() {
        // One sweep from arbitrary node states must equal
        // u0 + X_{t_k,0}(u0) + Σ_j cell_integral(...) evaluated cell by cell.
        for eq in [EquationKind::Kdv, EquationKind::Dnls, EquationKind::Nls] {
            let c = ctx(eq, 5);
            let cons = if eq == EquationKind::Nls { Constraints::NONE } else { Constraints::MEAN_ZERO };
            let field = |s| random_field(5, Profile::White, s, cons).unwrap().scale(C64::new(0.3, 0.0));
            let u0 = field(3);
            let (times, constraints) = prepare(&c, &u0, 0.04, &SolverConfig::default().with_steps(6)).unwrap();
            let states: Vec<SpectralField> = (0..times.len() as u64).map(|s| field(10 + s)).collect();
            let prev: Vec<Vec<C64>> = states.iter().map(|s| s.coeffs().to_vec()).collect();
            for rule in [Quadrature::Left, Quadrature::Trapezoid] {
                let kernel = Kernel::new(&c, &u0, times.clone(), rule, constraints);
                let next = kernel.sweep(&prev);
                for k in [1, 3, 6] {
                    let tk = times[k];
                    let mut expected = if eq == EquationKind::Nls {
                        &u0 + &c.trilinear_nonresonant_nls(0.0, tk, &u0, &u0, &u0).unwrap()
                    } else {
                        &u0 + &c.bilinear_driver(0.0, tk, &u0, &u0).unwrap()
                    };
                    for j in 0..k {
                        let (a, b) = (&states[j], &states[j + 1]);
                        let part = super::cell::cell_integral(&c, times[j], times[j + 1], tk, a, b, rule).unwrap();
                        expected = &expected + &part;
                        if eq == EquationKind::Nls {
                            let h = times[j + 1] - times[j];
                            let ra = crate::operators::resonant_cubic(a, a, a).unwrap();
                            let rb = crate::operators::resonant_cubic(b, b, b).unwrap();
                            let res = match rule {
                                Quadrature::Left => &ra * h,
                                Quadrature::Trapezoid => &(&ra + &rb) * (0.5 * h),
                            };
                            expected = &expected + &res;
                        }
                    }
                    let got = SpectralField::from_coeffs(5, next[k].clone(), Constraints::NONE).unwrap();
                    let err = got.max_abs_diff(&expected.with_constraints(Constraints::NONE));
                    assert!(err < 1e-13, "{eq} {rule:?} node {k}: {err}");
                }
            }
        }
    }

    #[test]
    fn kdv_single_mode_conserves_mass() {
        let c = ctx(EquationKind::Kdv, 16);
        let u0 = random_field(16, Profile::SingleMode { mode: 1 }, 0, Constraints::REAL_MEAN_ZERO).unwrap();
        let cfg = SolverConfig::default();
        let traj = solve_normal_form(&c, &u0, 0.05, &cfg).unwrap();
        assert!(traj.picard_iterations <= 12, "{}", traj.picard_iterations);
        let drift = (traj.final_state().mass() - u0.mass()).abs() / u0.mass();
        assert!(drift < 1e-6, "{drift}");
        assert_eq!(traj.final_state().get(0), C64::new(0.0, 0.0));
    }

    #[test]
    fn forced_non_convergence_is_reported() {
        let path = ModulationPath::linear(0.0, 1.0, 3).unwrap();
        let c = OperatorContext::new(EquationKind::Kdv, Arc::new(path), 8).unwrap();
        let u0 = random_field(8, Profile::White, 1, Constraints::REAL_MEAN_ZERO)
            .unwrap()
            .scale(C64::new(50.0, 0.0));
        let cfg = SolverConfig { picard_max_iter: 3, ..SolverConfig::default() };
        match solve_normal_form(&c, &u0, 1.0, &cfg) {
            Err(Error::NonConvergence { .. }) => {}
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
