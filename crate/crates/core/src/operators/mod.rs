//! Resonance functions and the multilinear operators built from phase
//! integrals: the quadratic driver, the trilinear normal-form operator, the
//! cubic NLS driver and its resonant part, and the quintic NLS operators.
//!
//! Every operator is a direct sum over the truncated band. Input and
//! intermediate frequencies range over `|n| <= N` and outputs live on the same
//! band, so the operators are the exact multilinear forms of the Galerkin
//! system.

mod nls;
mod quadratic;
mod resonance;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::modulation::ModulationPath;
use crate::spectral::{DispersionSymbol, EquationKind, SpectralField};

pub use nls::resonant_cubic;
pub use resonance::{resonance_cubic_nls, resonance_quadratic};

/// Memo entries kept before the cache is flushed.
const MEMO_CAPACITY: usize = 4096;

/// Frequency interactions of one multilinear sum, grouped by output mode.
///
/// Pair stencils hold `(n, n1, n2)` with `n = n1 + n2`, all nonzero.
/// Triple stencils hold `(n, n1, n2, n3)` with `n = n1 - n2 + n3` and
/// `n ∉ {n1, n3}`. Indices are band positions `n + N`.
#[derive(Debug)]
pub(crate) struct Stencil {
    pub offsets: Vec<usize>,
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub c: Vec<u32>,
    pub key: Vec<u32>,
    /// Distinct resonance values referenced by `key`.
    pub keys: Vec<f64>,
    lookup: HashMap<u64, u32>,
}

fn key_bits(x: f64) -> u64 {
    // Fold -0.0 onto 0.0.
    (x + 0.0).to_bits()
}

impl Stencil {
    fn builder(len: usize) -> Self {
        Self {
            offsets: vec![0; len + 1],
            a: Vec::new(),
            b: Vec::new(),
            c: Vec::new(),
            key: Vec::new(),
            keys: Vec::new(),
            lookup: HashMap::new(),
        }
    }

    fn push(&mut self, a: usize, b: usize, c: usize, xi: f64) {
        let next = self.keys.len() as u32;
        let k = *self.lookup.entry(key_bits(xi)).or_insert(next);
        if k == next {
            self.keys.push(xi);
        }
        self.a.push(a as u32);
        self.b.push(b as u32);
        self.c.push(c as u32);
        self.key.push(k);
    }

    fn pair(symbol: &DispersionSymbol, max_mode: usize) -> Self {
        let nn = max_mode as i64;
        let len = 2 * max_mode + 1;
        let mut st = Self::builder(len);
        for i in 0..len {
            let n = i as i64 - nn;
            if n != 0 {
                for n1 in (n - nn).max(-nn)..=(n + nn).min(nn) {
                    let n2 = n - n1;
                    if n1 == 0 || n2 == 0 {
                        continue;
                    }
                    let xi = resonance_quadratic(symbol, n, n1, n2);
                    st.push((n1 + nn) as usize, (n2 + nn) as usize, 0, xi);
                }
            }
            st.offsets[i + 1] = st.a.len();
        }
        st
    }

    fn triple(max_mode: usize) -> Self {
        let nn = max_mode as i64;
        let len = 2 * max_mode + 1;
        let mut st = Self::builder(len);
        for i in 0..len {
            let n = i as i64 - nn;
            for n1 in -nn..=nn {
                if n1 == n {
                    continue;
                }
                for n3 in -nn..=nn {
                    let n2 = n1 + n3 - n;
                    if n3 == n || n2.abs() > nn {
                        continue;
                    }
                    let xi = resonance_cubic_nls(n, n1, n2, n3) as f64;
                    st.push((n1 + nn) as usize, (n2 + nn) as usize, (n3 + nn) as usize, xi);
                }
            }
            st.offsets[i + 1] = st.a.len();
        }
        st
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn outputs(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Index of a resonance value among `keys`.
    pub fn key_index(&self, xi: f64) -> Option<usize> {
        self.lookup.get(&key_bits(xi)).map(|&k| k as usize)
    }

    /// `out(n) = Σ weight(Ξ) g1(n1) g2(n2)` over a pair stencil.
    pub fn pair_sum(&self, weights: &[C64], g1: &[C64], g2: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.outputs()];
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let mut acc = C64::new(0.0, 0.0);
            for j in self.offsets[i]..self.offsets[i + 1] {
                acc += weights[self.key[j] as usize]
                    * g1[self.a[j] as usize]
                    * g2[self.b[j] as usize];
            }
            *o = acc;
        });
        out
    }

    /// `out(n) = Σ weight(Ξ) g1(n1) conj(g2(n2)) g3(n3)` over a triple stencil.
    pub fn triple_sum(&self, weights: &[C64], g1: &[C64], g2: &[C64], g3: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.outputs()];
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let mut acc = C64::new(0.0, 0.0);
            for j in self.offsets[i]..self.offsets[i + 1] {
                acc += weights[self.key[j] as usize]
                    * g1[self.a[j] as usize]
                    * g2[self.b[j] as usize].conj()
                    * g3[self.c[j] as usize];
            }
            *o = acc;
        });
        out
    }

    /// `exp(i Ξ w)` for every key.
    pub fn cis_weights(&self, w: f64) -> Vec<C64> {
        self.keys
            .iter()
            .map(|&xi| {
                let (s, c) = (xi * w).sin_cos();
                C64::new(c, s)
            })
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum StencilKind {
    Pair = 0,
    Triple = 1,
}

type PhaseMemo = HashMap<(u64, u64, StencilKind), Arc<Vec<C64>>>;

struct Inner {
    equation: EquationKind,
    symbol: DispersionSymbol,
    path: Arc<ModulationPath>,
    max_mode: usize,
    pair: OnceLock<Stencil>,
    triple: OnceLock<Stencil>,
    memo: RwLock<PhaseMemo>,
}

/// Equation, modulation path and truncation shared by operator evaluations,
/// plus a cache of phase-integral tables keyed by `(r, t)`.
///
/// Cloning is cheap and clones share the cache.
#[derive(Clone)]
pub struct OperatorContext {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for OperatorContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorContext")
            .field("equation", &self.inner.equation)
            .field("max_mode", &self.inner.max_mode)
            .field("horizon", &self.inner.path.horizon())
            .finish()
    }
}

impl OperatorContext {
    pub fn new(equation: EquationKind, path: Arc<ModulationPath>, max_mode: usize) -> Result<Self> {
        if max_mode == 0 {
            return invalid("max_mode must be at least 1");
        }
        if let EquationKind::Ilw { depth } = equation {
            if !(depth.is_finite() && depth > 0.0) {
                return invalid(format!("ILW depth must be positive, got {depth}"));
            }
        }
        Ok(Self {
            inner: Arc::new(Inner {
                equation,
                symbol: equation.symbol(),
                path,
                max_mode,
                pair: OnceLock::new(),
                triple: OnceLock::new(),
                memo: RwLock::new(HashMap::new()),
            }),
        })
    }

    pub fn equation(&self) -> EquationKind {
        self.inner.equation
    }

    pub fn symbol(&self) -> DispersionSymbol {
        self.inner.symbol
    }

    pub fn path(&self) -> &ModulationPath {
        &self.inner.path
    }

    pub fn path_arc(&self) -> Arc<ModulationPath> {
        Arc::clone(&self.inner.path)
    }

    pub fn max_mode(&self) -> usize {
        self.inner.max_mode
    }

    /// Multiplier `m(n)` of the quadratic nonlinearity: `i n` for
    /// KdV/BO/ILW and `n` for dNLS.
    pub fn multiplier(&self, n: i64) -> C64 {
        match self.inner.equation {
            EquationKind::Dnls => C64::new(n as f64, 0.0),
            _ => C64::new(0.0, n as f64),
        }
    }

    pub(crate) fn multipliers(&self) -> Vec<C64> {
        let nn = self.max_mode() as i64;
        (-nn..=nn).map(|n| self.multiplier(n)).collect()
    }

    pub(crate) fn pair_stencil(&self) -> &Stencil {
        self.inner
            .pair
            .get_or_init(|| Stencil::pair(&self.inner.symbol, self.inner.max_mode))
    }

    pub(crate) fn triple_stencil(&self) -> &Stencil {
        self.inner.triple.get_or_init(|| Stencil::triple(self.inner.max_mode))
    }

    fn stencil(&self, kind: StencilKind) -> &Stencil {
        match kind {
            StencilKind::Pair => self.pair_stencil(),
            StencilKind::Triple => self.triple_stencil(),
        }
    }

    /// `Φ_{t,r}(Ξ)` for every key of the stencil, memoized per `(r, t)`.
    fn phase_table(&self, r: f64, t: f64, kind: StencilKind) -> Arc<Vec<C64>> {
        let id = (r.to_bits(), t.to_bits(), kind);
        if let Some(hit) = self.inner.memo.read().expect("memo lock").get(&id) {
            return Arc::clone(hit);
        }
        let path = &self.inner.path;
        let table: Vec<C64> = self
            .stencil(kind)
            .keys
            .par_iter()
            .map(|&xi| path.phase_unchecked(r, t, xi))
            .collect();
        let table = Arc::new(table);
        let mut memo = self.inner.memo.write().expect("memo lock");
        if memo.len() >= MEMO_CAPACITY {
            memo.clear();
        }
        Arc::clone(memo.entry(id).or_insert(table))
    }

    pub(crate) fn pair_phases(&self, r: f64, t: f64) -> Arc<Vec<C64>> {
        self.phase_table(r, t, StencilKind::Pair)
    }

    pub(crate) fn triple_phases(&self, r: f64, t: f64) -> Arc<Vec<C64>> {
        self.phase_table(r, t, StencilKind::Triple)
    }

    /// Drops all cached phase tables.
    pub fn clear_cache(&self) {
        self.inner.memo.write().expect("memo lock").clear();
    }

    /// Validates `0 <= r <= t <= T` and returns the clamped pair.
    pub(crate) fn interval(&self, r: f64, t: f64) -> Result<(f64, f64)> {
        let path = self.path();
        let r_c = path.value_at(r).map(|_| r.clamp(0.0, path.horizon()))?;
        let t_c = path.value_at(t).map(|_| t.clamp(0.0, path.horizon()))?;
        if r_c > t_c {
            return invalid(format!("interval needs r <= t, got r={r}, t={t}"));
        }
        Ok((r_c, t_c))
    }

    pub(crate) fn check_band(&self, fields: &[&SpectralField]) -> Result<()> {
        for f in fields {
            if f.max_mode() != self.max_mode() {
                return invalid(format!(
                    "field has N={} but the context uses N={}",
                    f.max_mode(),
                    self.max_mode()
                ));
            }
        }
        Ok(())
    }

    pub(crate) fn require_quadratic(&self) -> Result<()> {
        if !self.equation().is_quadratic() {
            return invalid(format!("operator needs a quadratic equation, context is {}", self.equation()));
        }
        Ok(())
    }

    pub(crate) fn require_nls(&self) -> Result<()> {
        if self.equation() != EquationKind::Nls {
            return invalid(format!("operator needs the cubic NLS, context is {}", self.equation()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(eq: EquationKind, n: usize) -> OperatorContext {
        let path = ModulationPath::linear(1.0, 1.0, 9).unwrap();
        OperatorContext::new(eq, Arc::new(path), n).unwrap()
    }

    #[test]
    fn pair_stencil_counts_nonzero_pairs() {
        let c = ctx(EquationKind::Kdv, 3);
        let st = c.pair_stencil();
        let mut expected = 0;
        for n in -3i64..=3 {
            for n1 in -3i64..=3 {
                let n2 = n - n1;
                if n != 0 && n1 != 0 && n2 != 0 && n2.abs() <= 3 {
                    expected += 1;
                }
            }
        }
        assert_eq!(st.len(), expected);
        assert_eq!(st.offsets[3], st.offsets[4], "no terms at n = 0");
        for (j, &k) in st.key.iter().enumerate() {
            let n = (0..st.outputs()).find(|&i| st.offsets[i] <= j && j < st.offsets[i + 1]).unwrap();
            let (n, n1, n2) = (n as i64 - 3, st.a[j] as i64 - 3, st.b[j] as i64 - 3);
            assert_eq!(st.keys[k as usize], (-3 * n * n1 * n2) as f64);
        }
    }

    #[test]
    fn triple_stencil_excludes_resonant_terms() {
        let c = ctx(EquationKind::Nls, 4);
        let st = c.triple_stencil();
        assert!(st.keys.iter().all(|&k| k != 0.0));
        assert!(st.key_index(0.0).is_none());
    }

    #[test]
    fn memo_returns_identical_tables() {
        let c = ctx(EquationKind::Kdv, 4);
        let a = c.pair_phases(0.1, 0.7);
        let b = c.pair_phases(0.1, 0.7);
        assert!(Arc::ptr_eq(&a, &b));
        c.clear_cache();
        let d = c.pair_phases(0.1, 0.7);
        assert_eq!(*a, *d);
    }

    #[test]
    fn context_rejects_bad_arguments() {
        let path = Arc::new(ModulationPath::linear(1.0, 1.0, 9).unwrap());
        assert!(OperatorContext::new(EquationKind::Kdv, Arc::clone(&path), 0).is_err());
        assert!(OperatorContext::new(EquationKind::Ilw { depth: -1.0 }, path, 4).is_err());
    }
}
