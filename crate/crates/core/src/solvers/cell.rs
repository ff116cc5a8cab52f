//! Product quadrature for `∫_{r0}^{r1} 𝒩_{t,t'}(u(t')) dt'` on one cell.
//!
//! Each term of `𝒩_{t,t'}` is `Φ_{t,t'}(Ξ_out) e^{iΞ_in w(t')}` times a
//! product of states. The inner exponential oscillates on the scale of the
//! path, so it is integrated exactly over the cell (`Φ_{r1,r0}(Ξ_in)`); the
//! outer weight and the states are sampled at the left end (left rule) or
//! averaged over both ends (trapezoid rule).

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::Quadrature;
use crate::error::{invalid, Result};
use crate::operators::{OperatorContext, Stencil};
use crate::spectral::{Constraints, EquationKind, SpectralField};

pub(crate) fn stencil(ctx: &OperatorContext) -> &Stencil {
    if ctx.equation() == EquationKind::Nls {
        ctx.triple_stencil()
    } else {
        ctx.pair_stencil()
    }
}

fn is_nls(ctx: &OperatorContext) -> bool {
    ctx.equation() == EquationKind::Nls
}

/// Cell-integrated inner factor: `m ⊙ S(inner; u, u)` for the quadratic
/// equations, `S(inner; u, u, u) - width |u|²u` for the cubic NLS.
pub(crate) fn aux(ctx: &OperatorContext, u: &[C64], inner: &[C64], width: f64) -> Vec<C64> {
    let st = stencil(ctx);
    if is_nls(ctx) {
        let c = st.triple_sum(inner, u, u, u);
        c.iter().zip(u).map(|(c, v)| c - width * v * v.conj() * v).collect()
    } else {
        let b = st.pair_sum(inner, u, u);
        b.iter().zip(ctx.multipliers()).map(|(b, m)| b * m).collect()
    }
}

/// State-dependent factor of stencil term `t` (without the outer weight).
#[inline]
pub(crate) fn term(st: &Stencil, nls: bool, t: usize, g: &[C64], u: &[C64]) -> C64 {
    let (a, b) = (st.a[t] as usize, st.b[t] as usize);
    if nls {
        let c = st.c[t] as usize;
        -2.0 * g[a] * u[b].conj() * u[c] + u[a] * g[b].conj() * u[c]
    } else {
        g[a] * u[b]
    }
}

/// Per-output factor applied after the outer sum.
pub(crate) fn output_multipliers(ctx: &OperatorContext) -> Vec<C64> {
    if is_nls(ctx) {
        vec![C64::new(1.0, 0.0); 2 * ctx.max_mode() + 1]
    } else {
        ctx.multipliers().iter().map(|m| 2.0 * m).collect()
    }
}

fn outer_sum(ctx: &OperatorContext, outer: &[C64], g: &[C64], u: &[C64]) -> Vec<C64> {
    let st = stencil(ctx);
    if is_nls(ctx) {
        let first = st.triple_sum(outer, g, u, u);
        let second = st.triple_sum(outer, u, g, u);
        first.iter().zip(&second).map(|(a, b)| -2.0 * a + b).collect()
    } else {
        st.pair_sum(outer, g, u)
    }
}

/// Applies the cell rule given its phase tables. `outer` is already averaged
/// for the trapezoid rule; `right` is `None` for the left rule.
pub(crate) fn apply(
    ctx: &OperatorContext,
    inner: &[C64],
    width: f64,
    outer: &[C64],
    left: &[C64],
    right: Option<&[C64]>,
) -> Vec<C64> {
    let mut out = outer_sum(ctx, outer, &aux(ctx, left, inner, width), left);
    if let Some(right) = right {
        let r = outer_sum(ctx, outer, &aux(ctx, right, inner, width), right);
        for (o, r) in out.iter_mut().zip(r) {
            *o = 0.5 * (*o + r);
        }
    }
    for (o, m) in out.iter_mut().zip(output_multipliers(ctx)) {
        *o *= m;
    }
    out
}

fn average(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

fn phases(ctx: &OperatorContext, r: f64, t: f64) -> std::sync::Arc<Vec<C64>> {
    if is_nls(ctx) {
        ctx.triple_phases(r, t)
    } else {
        ctx.pair_phases(r, t)
    }
}

/// One cell `[r0, r1]` of `∫ 𝒩_{t,t'}(u(t')) dt'` with end states `left`
/// and `right` (the right state is ignored by the left rule). For the cubic
/// NLS the integrand is `𝒩𝒩 + 𝒩ℛ`; the resonant part is not included.
pub fn cell_integral(
    ctx: &OperatorContext,
    r0: f64,
    r1: f64,
    t: f64,
    left: &SpectralField,
    right: &SpectralField,
    rule: Quadrature,
) -> Result<SpectralField> {
    ctx.check_band(&[left, right])?;
    let (r0, r1) = ctx.interval(r0, r1)?;
    let (_, t) = ctx.interval(r1, t)?;
    if !(r0 < r1) {
        return invalid(format!("cell needs r0 < r1, got {r0}, {r1}"));
    }
    let inner = phases(ctx, r0, r1);
    let out = match rule {
        Quadrature::Left => apply(ctx, &inner, r1 - r0, &phases(ctx, r0, t), left.coeffs(), None),
        Quadrature::Trapezoid => {
            let outer = average(&phases(ctx, r0, t), &phases(ctx, r1, t));
            apply(ctx, &inner, r1 - r0, &outer, left.coeffs(), Some(right.coeffs()))
        }
    };
    let constraints = if is_nls(ctx) { Constraints::NONE } else { Constraints::MEAN_ZERO };
    let mut f = SpectralField::zeros(ctx.max_mode(), Constraints::NONE);
    f.coeffs_mut().copy_from_slice(&out);
    Ok(f.project(constraints))
}

/// Phase tables on a node grid: `prefix(k)[key] = Φ_{t_k,0}(Ξ)` and
/// `cell(j)[key] = Φ_{t_{j+1},t_j}(Ξ)`.
pub(crate) struct GridPhases {
    keys: usize,
    prefix: Vec<C64>,
    cells: Vec<C64>,
}

impl GridPhases {
    pub(crate) fn new(ctx: &OperatorContext, times: &[f64]) -> Self {
        let path = ctx.path();
        let keys = &stencil(ctx).keys;
        let t_end = *times.last().expect("non-empty grid");
        let columns: Vec<(Vec<C64>, Vec<C64>)> = keys
            .par_iter()
            .map(|&xi| {
                let prefix = path.node_prefix(xi, t_end);
                let p = times.iter().map(|&t| path.prefix_at(&prefix, xi, t)).collect();
                let c = times.windows(2).map(|w| path.phase_unchecked(w[0], w[1], xi)).collect();
                (p, c)
            })
            .collect();
        let nk = keys.len();
        let mut prefix = vec![C64::new(0.0, 0.0); times.len() * nk];
        let mut cells = vec![C64::new(0.0, 0.0); (times.len() - 1) * nk];
        for (key, (p, c)) in columns.iter().enumerate() {
            for (k, v) in p.iter().enumerate() {
                prefix[k * nk + key] = *v;
            }
            for (j, v) in c.iter().enumerate() {
                cells[j * nk + key] = *v;
            }
        }
        Self { keys: nk, prefix, cells }
    }

    pub(crate) fn prefix(&self, k: usize) -> &[C64] {
        &self.prefix[k * self.keys..(k + 1) * self.keys]
    }

    pub(crate) fn cell(&self, j: usize) -> &[C64] {
        &self.cells[j * self.keys..(j + 1) * self.keys]
    }

    /// `Φ_{t_to,t_from}` for every key.
    pub(crate) fn between(&self, from: usize, to: usize) -> Vec<C64> {
        if to == from + 1 {
            return self.cell(from).to_vec();
        }
        self.prefix(to).iter().zip(self.prefix(from)).map(|(b, a)| b - a).collect()
    }

    /// Cell rule over nodes `[j0, j1]` with outer time `t_k`.
    #[cfg(test)]
    pub(crate) fn cell_rule(
        &self,
        ctx: &OperatorContext,
        times: &[f64],
        (j0, j1, k): (usize, usize, usize),
        states: &[Vec<C64>],
        rule: Quadrature,
    ) -> Vec<C64> {
        let inner = if j1 == j0 + 1 {
            self.cell(j0).to_vec()
        } else {
            let mut acc = self.cell(j0).to_vec();
            for j in j0 + 1..j1 {
                for (a, c) in acc.iter_mut().zip(self.cell(j)) {
                    *a += c;
                }
            }
            acc
        };
        let width = times[j1] - times[j0];
        match rule {
            Quadrature::Left => apply(ctx, &inner, width, &self.between(j0, k), &states[j0], None),
            Quadrature::Trapezoid => {
                let outer = average(&self.between(j0, k), &self.between(j1, k));
                apply(ctx, &inner, width, &outer, &states[j0], Some(&states[j1]))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::modulation::{generate_fbm, ModulationPath};
    use crate::spectral::{random_field, Profile};

    #[test]
    fn grid_rule_matches_cell_integral() {
        let path = generate_fbm(0.3, 0.05, 129, 4).unwrap();
        for eq in [EquationKind::Kdv, EquationKind::Nls] {
            let ctx = OperatorContext::new(eq, Arc::new(path.clone()), 5).unwrap();
            let times: Vec<f64> = (0..=6).map(|k| k as f64 * 0.05 / 6.0).collect();
            let grid = GridPhases::new(&ctx, &times);
            let cons = if eq == EquationKind::Nls { Constraints::NONE } else { Constraints::MEAN_ZERO };
            let states: Vec<SpectralField> =
                (0..7).map(|s| random_field(5, Profile::White, s, cons).unwrap()).collect();
            let raw: Vec<Vec<C64>> = states.iter().map(|s| s.coeffs().to_vec()).collect();
            for rule in [Quadrature::Left, Quadrature::Trapezoid] {
                let got = grid.cell_rule(&ctx, &times, (1, 2, 5), &raw, rule);
                let want = cell_integral(&ctx, times[1], times[2], times[5], &states[1], &states[2], rule)
                    .unwrap();
                let err = got.iter().zip(want.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(err < 1e-13, "{eq} {rule:?}: {err}");
            }
        }
    }

    #[test]
    fn frozen_state_on_constant_path_is_exact() {
        // With w ≡ 0 every weight is polynomial in t' and the trapezoid rule
        // with constant states integrates (t - t') exactly.
        let path = ModulationPath::linear(0.0, 1.0, 3).unwrap();
        let ctx = OperatorContext::new(EquationKind::Kdv, Arc::new(path), 4).unwrap();
        let u = random_field(4, Profile::White, 2, Constraints::REAL_MEAN_ZERO).unwrap();
        let got = cell_integral(&ctx, 0.2, 0.5, 0.9, &u, &u, Quadrature::Trapezoid).unwrap();
        let unit = ctx.trilinear_normal_form(0.0, 1.0, &u, &u, &u).unwrap();
        // 𝒩_{t,t'} = (t - t') 𝒩_{1,0} here; ∫_{0.2}^{0.5} (0.9 - t') dt' = 0.165.
        assert!(got.max_abs_diff(&(&unit * 0.165)) < 1e-14 * unit.l2_norm());
    }
}
