//! Truncated Fourier fields on the circle, Sobolev norms and the modulated
//! linear propagator.

mod io;
mod symbol;

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;

pub use io::{read_field, write_field};
pub use symbol::{coth, DispersionSymbol, EquationKind};

/// Declared structure of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Constraints {
    pub mean_zero: bool,
    pub real_valued: bool,
}

impl Constraints {
    pub const NONE: Self = Self { mean_zero: false, real_valued: false };
    pub const MEAN_ZERO: Self = Self { mean_zero: true, real_valued: false };
    pub const REAL_MEAN_ZERO: Self = Self { mean_zero: true, real_valued: true };

    /// Constraints satisfied by both `self` and `other`.
    pub fn meet(self, other: Self) -> Self {
        Self {
            mean_zero: self.mean_zero && other.mean_zero,
            real_valued: self.real_valued && other.real_valued,
        }
    }
}

/// Fourier coefficients `c_n` for `|n| <= N`, stored at index `n + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    max_mode: usize,
    coeffs: Vec<C64>,
    constraints: Constraints,
}

#[inline]
fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl SpectralField {
    pub fn zeros(max_mode: usize, constraints: Constraints) -> Self {
        Self {
            max_mode,
            coeffs: vec![zero(); 2 * max_mode + 1],
            constraints,
        }
    }

    /// Builds a field from `2N + 1` coefficients ordered `n = -N..=N`, checking
    /// the declared constraints exactly.
    pub fn from_coeffs(max_mode: usize, coeffs: Vec<C64>, constraints: Constraints) -> Result<Self> {
        if max_mode == 0 {
            return invalid("max_mode must be at least 1");
        }
        if coeffs.len() != 2 * max_mode + 1 {
            return invalid(format!(
                "expected {} coefficients for N={max_mode}, got {}",
                2 * max_mode + 1,
                coeffs.len()
            ));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return invalid("coefficients must be finite");
        }
        let field = Self { max_mode, coeffs, constraints };
        field.check_constraints(0.0)?;
        Ok(field)
    }

    /// A field with a single nonzero coefficient.
    pub fn delta(max_mode: usize, n: i64, value: C64) -> Result<Self> {
        if n.unsigned_abs() as usize > max_mode {
            return invalid(format!("mode {n} outside band {max_mode}"));
        }
        let mut f = Self::zeros(max_mode, Constraints::NONE);
        f.set(n, value);
        f.constraints.mean_zero = n != 0 || value == zero();
        Ok(f)
    }

    /// Verifies the declared constraints up to an absolute tolerance.
    pub fn check_constraints(&self, tol: f64) -> Result<()> {
        if self.constraints.mean_zero && self.get(0).norm() > tol {
            return invalid(format!("declared mean-zero but c_0 = {}", self.get(0)));
        }
        if self.constraints.real_valued {
            for n in 0..=self.max_mode as i64 {
                if (self.get(-n) - self.get(n).conj()).norm() > tol {
                    return invalid(format!("declared real-valued but c_{{-{n}}} != conj(c_{n})"));
                }
            }
        }
        Ok(())
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    pub fn constraints(&self) -> Constraints {
        self.constraints
    }

    pub fn mean_zero(&self) -> bool {
        self.constraints.mean_zero
    }

    pub fn real_valued(&self) -> bool {
        self.constraints.real_valued
    }

    /// Coefficients ordered `n = -N..=N`.
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    /// Coefficient at mode `n`; zero outside the band.
    #[inline]
    pub fn get(&self, n: i64) -> C64 {
        let idx = n + self.max_mode as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            zero()
        } else {
            self.coeffs[idx as usize]
        }
    }

    /// Sets mode `n` (must lie in the band). Declared constraints are not
    /// re-checked; call [`Self::project`] or [`Self::check_constraints`].
    pub fn set(&mut self, n: i64, value: C64) {
        let idx = (n + self.max_mode as i64) as usize;
        self.coeffs[idx] = value;
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        let n0 = self.max_mode as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - n0, c))
    }

    pub fn with_constraints(mut self, constraints: Constraints) -> Self {
        self.constraints = constraints;
        self
    }

    /// Projects onto the given constraints (zeroes `c_0`, symmetrizes
    /// `c_{-n} = conj(c_n)`) and declares them.
    pub fn project(mut self, constraints: Constraints) -> Self {
        let n0 = self.max_mode;
        if constraints.mean_zero {
            self.coeffs[n0] = zero();
        }
        if constraints.real_valued {
            self.coeffs[n0].im = 0.0;
            for k in 1..=n0 {
                let avg = 0.5 * (self.coeffs[n0 + k] + self.coeffs[n0 - k].conj());
                self.coeffs[n0 + k] = avg;
                self.coeffs[n0 - k] = avg.conj();
            }
        }
        self.constraints = constraints;
        self
    }

    /// `(Σ (1 + n²)^s |c_n|²)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        if s == 0.0 {
            return self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        }
        self.modes()
            .map(|(n, c)| (1.0 + (n * n) as f64).powf(s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// Squared L² norm of the coefficient vector.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == zero())
    }

    pub fn same_band(&self, other: &Self) -> Result<()> {
        if self.max_mode != other.max_mode {
            return invalid(format!(
                "mismatched truncation: N={} vs N={}",
                self.max_mode, other.max_mode
            ));
        }
        Ok(())
    }

    /// Multiplies `c_n` by `exp(+i w φ(n))`, or `exp(-i w φ(n))` when
    /// `inverse`.
    pub fn propagate(&self, symbol: &DispersionSymbol, w: f64, inverse: bool) -> Self {
        let sign = if inverse { -1.0 } else { 1.0 };
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let n = i as i64 - self.max_mode as i64;
            let (s, co) = (sign * w * symbol.value(n)).sin_cos();
            *c *= C64::new(co, s);
        }
        out.constraints.real_valued &= symbol.is_odd();
        out
    }

    /// Multiplies every coefficient by a unimodular or general scalar.
    pub fn scale(&self, z: C64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= z;
        }
        if z.im != 0.0 {
            out.constraints.real_valued = false;
        }
        out
    }

    /// Largest coefficient difference in modulus.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.max_mode, other.max_mode, "mismatched truncation");
        Self {
            max_mode: self.max_mode,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect(),
            constraints: self.constraints.meet(other.constraints),
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Mul<C64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: C64) -> SpectralField {
        self.scale(rhs)
    }
}

/// Coefficient profiles for generated data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// Independent complex Gaussian coefficients of unit variance.
    White,
    /// `|c_n| = ⟨n⟩^{-alpha}` with uniformly random phases.
    PowerLaw { alpha: f64 },
    /// `c_n = 1` at a single mode (split as `1/2, 1/2` over `±n` for real
    /// fields, i.e. `cos(nx)`).
    SingleMode { mode: i64 },
}

/// Random test data. Deterministic in `seed`; the returned field satisfies
/// `constraints` exactly.
pub fn random_field(
    max_mode: usize,
    profile: Profile,
    seed: u64,
    constraints: Constraints,
) -> Result<SpectralField> {
    if max_mode == 0 {
        return invalid("max_mode must be at least 1");
    }
    let mut f = SpectralField::zeros(max_mode, Constraints::NONE);
    let nmax = max_mode as i64;
    match profile {
        Profile::SingleMode { mode } => {
            if mode.abs() > nmax {
                return invalid(format!("mode {mode} outside band {max_mode}"));
            }
            if constraints.mean_zero && mode == 0 {
                return invalid("single mode 0 conflicts with mean-zero constraint");
            }
            if constraints.real_valued && mode != 0 {
                f.set(mode, C64::new(0.5, 0.0));
                f.set(-mode, C64::new(0.5, 0.0));
            } else {
                f.set(mode, C64::new(1.0, 0.0));
            }
            return Ok(f.with_constraints(constraints));
        }
        Profile::White => {
            let mut rng = rng_from_seed(seed);
            for n in -nmax..=nmax {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                f.set(n, C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2);
            }
        }
        Profile::PowerLaw { alpha } => {
            if !alpha.is_finite() {
                return invalid("power-law exponent must be finite");
            }
            let mut rng = rng_from_seed(seed);
            for n in -nmax..=nmax {
                let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let amp = (1.0 + (n * n) as f64).powf(-0.5 * alpha);
                f.set(n, C64::from_polar(amp, theta));
            }
            if constraints.real_valued {
                // Keep the prescribed modulus: copy the positive half.
                for n in 1..=nmax {
                    let c = f.get(n);
                    f.set(-n, c.conj());
                }
                let c0 = f.get(0);
                f.set(0, C64::new(c0.norm() * c0.re.signum(), 0.0));
            }
        }
    }
    Ok(f.project(constraints))
}
