//! Residual of the increment identity
//! `u(t) - u(r) = X_{t,r}(u(r)) + ∫_r^t 𝒩_{t,t'}(u(t')) dt'`
//! on trajectory nodes, with the integral evaluated by the trajectory's
//! cell rule.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::cell::{self, GridPhases};
use super::{Quadrature, Trajectory};
use crate::error::{invalid, Result};
use crate::operators::{OperatorContext, Stencil};
use crate::spectral::{Constraints, EquationKind, SpectralField};

struct Setup<'a> {
    ctx: &'a OperatorContext,
    st: &'a Stencil,
    nls: bool,
    times: &'a [f64],
    states: Vec<Vec<C64>>,
    grid: GridPhases,
    out_mult: Vec<C64>,
    rule: Quadrature,
}

/// Running sums of the cell rule over consecutive cells starting at a fixed
/// node, so the integral up to any later outer time costs one stencil pass
/// (the same splitting as the solver kernel).
struct Running {
    s: Vec<C64>,
    q: Vec<C64>,
    resonant: Vec<C64>,
}

fn resonant(u: &[C64]) -> Vec<C64> {
    u.iter().map(|v| C64::new(0.0, 1.0) * v * v.conj() * v).collect()
}

impl Setup<'_> {
    fn running(&self) -> Running {
        let zero = C64::new(0.0, 0.0);
        Running { s: vec![zero; self.st.len()], q: vec![zero; self.st.len()], resonant: vec![zero; self.states[0].len()] }
    }

    /// Adds the cell `[t_j0, t_j1]` under `rule`.
    fn add_cell(&self, acc: &mut Running, j0: usize, j1: usize, rule: Quadrature) {
        let inner = if j1 == j0 + 1 {
            self.grid.cell(j0).to_vec()
        } else {
            self.grid.between(j0, j1)
        };
        let width = self.times[j1] - self.times[j0];
        let (u0, u1) = (&self.states[j0], &self.states[j1]);
        let (p0, p1) = (self.grid.prefix(j0), self.grid.prefix(j1));
        let gl = cell::aux(self.ctx, u0, &inner, width);
        let st = self.st;
        match rule {
            Quadrature::Left => {
                for t in 0..st.len() {
                    let coef = cell::term(st, self.nls, t, &gl, u0);
                    acc.s[t] += coef;
                    acc.q[t] += p0[st.key[t] as usize] * coef;
                }
            }
            Quadrature::Trapezoid => {
                let gr = cell::aux(self.ctx, u1, &inner, width);
                for t in 0..st.len() {
                    let coef = 0.5 * (cell::term(st, self.nls, t, &gl, u0) + cell::term(st, self.nls, t, &gr, u1));
                    let key = st.key[t] as usize;
                    acc.s[t] += coef;
                    acc.q[t] += 0.5 * (p0[key] + p1[key]) * coef;
                }
            }
        }
        if self.nls {
            let l = resonant(u0);
            let r = resonant(u1);
            for ((a, l), r) in acc.resonant.iter_mut().zip(l).zip(r) {
                *a += match rule {
                    Quadrature::Left => width * l,
                    Quadrature::Trapezoid => 0.5 * width * (l + r),
                };
            }
        }
    }

    /// Integral of the accumulated cells with outer time `t_k`.
    fn value(&self, acc: &Running, k: usize) -> Vec<C64> {
        let st = self.st;
        let pk = self.grid.prefix(k);
        (0..acc.resonant.len())
            .map(|i| {
                let mut sum = C64::new(0.0, 0.0);
                for t in st.offsets[i]..st.offsets[i + 1] {
                    sum += pk[st.key[t] as usize] * acc.s[t] - acc.q[t];
                }
                self.out_mult[i] * sum + acc.resonant[i]
            })
            .collect()
    }

    /// `∫_{t_from}^{t_to} 𝒩_{t_to,·}` over cells of `stride` nodes; a
    /// trailing partial stride is closed with a shorter cell.
    fn integral(&self, from: usize, to: usize, stride: usize, rule: Quadrature) -> Vec<C64> {
        let mut acc = self.running();
        let mut i = from;
        while i < to {
            let next = (i + stride).min(to);
            self.add_cell(&mut acc, i, next, rule);
            i = next;
        }
        self.value(&acc, to)
    }

    fn other_rule(&self) -> Quadrature {
        match self.rule {
            Quadrature::Left => Quadrature::Trapezoid,
            Quadrature::Trapezoid => Quadrature::Left,
        }
    }

    /// Step-doubling estimate of the error of [`Self::integral`] at stride 1;
    /// a single cell is compared against the other rule instead.
    fn estimate(&self, from: usize, to: usize) -> f64 {
        self.estimate_against(&self.integral(from, to, 1, self.rule), from, to)
    }

    fn estimate_against(&self, fine: &[C64], from: usize, to: usize) -> f64 {
        let coarse = match to - from {
            0 => return 0.0,
            1 => self.integral(from, to, 1, self.other_rule()),
            _ => self.integral(from, to, 2, self.rule),
        };
        l2(fine, &coarse)
    }

    /// `X_{t_b,t_a}(u_a)` from the grid's prefix tables.
    fn driver(&self, a: usize, b: usize, ua: &SpectralField) -> Result<SpectralField> {
        let phases = self.grid.between(a, b);
        let u = ua.coeffs();
        let coeffs: Vec<C64> = if self.nls {
            self.st.triple_sum(&phases, u, u, u).into_iter().map(|v| C64::new(0.0, -1.0) * v).collect()
        } else {
            let m = self.ctx.multipliers();
            self.st.pair_sum(&phases, u, u).into_iter().zip(m).map(|(v, m)| v * m).collect()
        };
        let cons = if self.nls { Constraints::NONE } else { Constraints::MEAN_ZERO };
        SpectralField::from_coeffs(self.ctx.max_mode(), coeffs, cons)
    }

    /// Residuals for all `t > a` with the fine and coarse integrals grown one
    /// cell at a time; the estimate excludes the terms from 0.
    fn row(&self, traj: &Trajectory, a: usize) -> Result<Vec<(usize, f64, f64)>> {
        let b = self.times.len() - 1;
        let ua = &traj.states()[a];
        let mut fine = self.running();
        let mut coarse = self.running();
        let mut out = Vec::with_capacity(b - a);
        for t in a + 1..=b {
            self.add_cell(&mut fine, t - 1, t, self.rule);
            let quad = self.value(&fine, t);
            let coarse_val = if t == a + 1 {
                self.integral(a, t, 1, self.other_rule())
            } else if (t - a).is_multiple_of(2) {
                self.add_cell(&mut coarse, t - 2, t, self.rule);
                self.value(&coarse, t)
            } else {
                let mut last = self.running();
                self.add_cell(&mut last, t - 1, t, self.rule);
                self.value(&coarse, t).iter().zip(self.value(&last, t)).map(|(c, l)| c + l).collect()
            };
            let x = self.driver(a, t, ua)?;
            let lhs = (&traj.states()[t] - ua).coeffs().to_vec();
            let rhs: Vec<C64> = x.coeffs().iter().zip(&quad).map(|(x, q)| x + q).collect();
            out.push((t, l2(&lhs, &rhs), l2(&quad, &coarse_val)));
        }
        Ok(out)
    }
}

fn l2(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn setup<'a>(ctx: &'a OperatorContext, traj: &'a Trajectory, r: f64, t: f64) -> Result<(Setup<'a>, usize, usize)> {
    ctx.check_band(&[traj.final_state()])?;
    let a = traj.node_index(r)?;
    let b = traj.node_index(t)?;
    if a > b {
        return invalid(format!("increment identity needs r <= t, got {r} > {t}"));
    }
    let times = &traj.times()[..=b];
    let states = traj.states()[..=b].iter().map(|s| s.coeffs().to_vec()).collect();
    let grid = GridPhases::new(ctx, times);
    let setup = Setup {
        ctx,
        st: cell::stencil(ctx),
        nls: ctx.equation() == EquationKind::Nls,
        times,
        states,
        grid,
        out_mult: cell::output_multipliers(ctx),
        rule: traj.quadrature(),
    };
    Ok((setup, a, b))
}

/// `‖u(t) - u(r) - X_{t,r}(u(r)) - Quad ∫_r^t 𝒩_{t,t'}(u(t')) dt'‖_{L²}` for
/// nodes `r <= t` of an interaction-representation trajectory (the cubic NLS
/// adds the resonant integral).
pub fn verify_increment_identity(ctx: &OperatorContext, traj: &Trajectory, r: f64, t: f64) -> Result<f64> {
    let (s, a, b) = setup(ctx, traj, r, t)?;
    if a == b {
        return Ok(0.0);
    }
    let ua = &traj.states()[a];
    let x = s.driver(a, b, ua)?;
    let quad = s.integral(a, b, 1, s.rule);
    let lhs = (&traj.states()[b] - ua).coeffs().to_vec();
    let rhs: Vec<C64> = x.coeffs().iter().zip(&quad).map(|(x, q)| x + q).collect();
    Ok(l2(&lhs, &rhs))
}

/// Step-doubling estimate of the quadrature error in the residual at
/// `(r, t)`: the identity's own integral over `[r, t]` plus the solver's
/// integrals over `[0, r]` and `[0, t]`.
pub fn increment_quadrature_estimate(ctx: &OperatorContext, traj: &Trajectory, r: f64, t: f64) -> Result<f64> {
    let (s, a, b) = setup(ctx, traj, r, t)?;
    if a == b {
        return Ok(0.0);
    }
    Ok(s.estimate(a, b) + s.estimate(0, b) + s.estimate(0, a))
}

/// Residual and quadrature estimate of the identity at one node pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementCheck {
    pub r_index: usize,
    pub t_index: usize,
    pub residual: f64,
    pub estimate: f64,
}

/// [`verify_increment_identity`] and [`increment_quadrature_estimate`] on
/// every node pair `r < t`, sharing one phase grid.
pub fn increment_identity_sweep(ctx: &OperatorContext, traj: &Trajectory) -> Result<Vec<IncrementCheck>> {
    let last = traj.times()[traj.len() - 1];
    let (s, _, b) = setup(ctx, traj, 0.0, last)?;
    let rows = (0..b).into_par_iter().map(|a| s.row(traj, a)).collect::<Result<Vec<_>>>()?;
    let mut from_zero = vec![0.0; b + 1];
    for &(t, _, est) in &rows[0] {
        from_zero[t] = est;
    }
    Ok(rows
        .into_iter()
        .enumerate()
        .flat_map(|(a, row)| {
            let from_zero = &from_zero;
            row.into_iter().map(move |(t, residual, est)| IncrementCheck {
                r_index: a,
                t_index: t,
                residual,
                estimate: est + from_zero[t] + from_zero[a],
            })
        })
        .collect())
}

/// Residual of the identity as a field, for diagnostics that need more than
/// its norm.
pub fn increment_residual(ctx: &OperatorContext, traj: &Trajectory, r: f64, t: f64) -> Result<SpectralField> {
    let (s, a, b) = setup(ctx, traj, r, t)?;
    let mut out = &traj.states()[b] - &traj.states()[a];
    if a == b {
        return Ok(out);
    }
    let x = s.driver(a, b, &traj.states()[a])?;
    out = &out - &x;
    let quad = s.integral(a, b, 1, s.rule);
    let mut f = SpectralField::zeros(ctx.max_mode(), out.constraints());
    for (slot, (o, q)) in f.coeffs_mut().iter_mut().zip(out.coeffs().iter().zip(&quad)) {
        *slot = o - q;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::modulation::generate_fbm;
    use crate::solvers::{solve_normal_form, SolverConfig};
    use crate::spectral::{random_field, Constraints, Profile};

    #[test]
    fn zero_trajectory_and_degenerate_pair() {
        let path = generate_fbm(0.3, 0.05, 257, 2).unwrap();
        let ctx = OperatorContext::new(EquationKind::Kdv, Arc::new(path), 6).unwrap();
        let zero = SpectralField::zeros(6, Constraints::REAL_MEAN_ZERO);
        let cfg = SolverConfig::default().with_steps(8);
        let traj = solve_normal_form(&ctx, &zero, 0.05, &cfg).unwrap();
        assert_eq!(verify_increment_identity(&ctx, &traj, 0.0, 0.05).unwrap(), 0.0);

        let u0 = random_field(6, Profile::White, 1, Constraints::REAL_MEAN_ZERO).unwrap();
        let traj = solve_normal_form(&ctx, &u0, 0.05, &cfg).unwrap();
        let t = traj.times()[3];
        assert_eq!(verify_increment_identity(&ctx, &traj, t, t).unwrap(), 0.0);
        assert!(verify_increment_identity(&ctx, &traj, 0.0123, 0.05).is_err());
        // From r = 0 the identity is the fixed-point equation itself.
        let res = verify_increment_identity(&ctx, &traj, 0.0, 0.05).unwrap();
        assert!(res < 1e-9, "{res}");
        let field = increment_residual(&ctx, &traj, 0.0, 0.05).unwrap();
        assert!((field.l2_norm() - res).abs() < 1e-15);
    }

    #[test]
    fn interior_pairs_are_within_the_quadrature_estimate() {
        let path = generate_fbm(0.3, 0.05, 513, 9).unwrap();
        for eq in [EquationKind::Kdv, EquationKind::Nls] {
            let ctx = OperatorContext::new(eq, Arc::new(path.clone()), 6).unwrap();
            let cons = if eq == EquationKind::Nls { Constraints::NONE } else { Constraints::REAL_MEAN_ZERO };
            let u0 = random_field(6, Profile::White, 5, cons).unwrap();
            let cfg = SolverConfig::default().with_steps(16);
            let traj = solve_normal_form(&ctx, &u0, 0.05, &cfg).unwrap();
            let (r, t) = (traj.times()[5], traj.times()[13]);
            let res = verify_increment_identity(&ctx, &traj, r, t).unwrap();
            let est = increment_quadrature_estimate(&ctx, &traj, r, t).unwrap();
            assert!(res <= 10.0 * (cfg.picard_tol + est), "{eq}: {res} vs {est}");
        }
    }

    #[test]
    fn sweep_agrees_with_single_pairs() {
        let path = generate_fbm(0.3, 0.05, 257, 4).unwrap();
        let ctx = OperatorContext::new(EquationKind::BenjaminOno, Arc::new(path), 5).unwrap();
        let u0 = random_field(5, Profile::White, 6, Constraints::REAL_MEAN_ZERO).unwrap();
        let traj = solve_normal_form(&ctx, &u0, 0.05, &SolverConfig::default().with_steps(6)).unwrap();
        let sweep = increment_identity_sweep(&ctx, &traj).unwrap();
        assert_eq!(sweep.len(), 21);
        for c in sweep.iter().filter(|c| c.r_index == 2 || c.t_index == 5) {
            let (r, t) = (traj.times()[c.r_index], traj.times()[c.t_index]);
            assert!((c.residual - verify_increment_identity(&ctx, &traj, r, t).unwrap()).abs() < 1e-15);
            assert!((c.estimate - increment_quadrature_estimate(&ctx, &traj, r, t).unwrap()).abs() < 1e-15);
        }
    }
}
