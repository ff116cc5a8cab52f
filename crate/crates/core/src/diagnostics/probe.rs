use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::report::{ConvergenceReport, Thresholds};
use crate::error::{invalid, Error, Result};
use crate::operators::OperatorContext;
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::spectral::{random_field, Constraints, EquationKind, Profile, SpectralField};

/// Multilinear operators with a `(t - r)` scaling to probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorTag {
    /// `X_{t,r}` of the quadratic equations.
    Bilinear,
    /// `𝒩_{t,r}` of the quadratic equations.
    Trilinear,
    /// Non-resonant cubic driver of the NLS.
    NlsDriver,
    QuinticNn,
    QuinticNr,
}

impl OperatorTag {
    pub const ALL: [Self; 5] = [Self::Bilinear, Self::Trilinear, Self::NlsDriver, Self::QuinticNn, Self::QuinticNr];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Bilinear => "bilinear",
            Self::Trilinear => "trilinear",
            Self::NlsDriver => "nls_driver",
            Self::QuinticNn => "quintic_nn",
            Self::QuinticNr => "quintic_nr",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Self::Bilinear => 2,
            Self::Trilinear | Self::NlsDriver => 3,
            Self::QuinticNn | Self::QuinticNr => 5,
        }
    }

    pub fn applies_to(&self, eq: EquationKind) -> bool {
        match self {
            Self::Bilinear | Self::Trilinear => eq.is_quadratic(),
            _ => eq == EquationKind::Nls,
        }
    }

    /// Tags implemented for `eq`.
    pub fn for_equation(eq: EquationKind) -> Vec<Self> {
        Self::ALL.into_iter().filter(|t| t.applies_to(eq)).collect()
    }

    pub fn apply(&self, ctx: &OperatorContext, r: f64, t: f64, f: &[SpectralField]) -> Result<SpectralField> {
        if f.len() != self.arity() {
            return invalid(format!("{} takes {} inputs, got {}", self.name(), self.arity(), f.len()));
        }
        match self {
            Self::Bilinear => ctx.bilinear_driver(r, t, &f[0], &f[1]),
            Self::Trilinear => ctx.trilinear_normal_form(r, t, &f[0], &f[1], &f[2]),
            Self::NlsDriver => ctx.trilinear_nonresonant_nls(r, t, &f[0], &f[1], &f[2]),
            Self::QuinticNn => ctx.quintic_nn(r, t, [&f[0], &f[1], &f[2], &f[3], &f[4]]),
            Self::QuinticNr => ctx.quintic_nr(r, t, [&f[0], &f[1], &f[2], &f[3], &f[4]]),
        }
    }
}

impl fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown operator tag '{s}'")))
    }
}

/// Dyadic interval lengths `T / 2^j`, `j = 0..=8`.
pub const PROBE_LEVELS: u32 = 9;
/// Interval positions sampled per level.
const POSITIONS: usize = 4;

fn input_constraints(eq: EquationKind) -> Constraints {
    if eq.preserves_reality() {
        Constraints::REAL_MEAN_ZERO
    } else if eq.requires_mean_zero() {
        Constraints::MEAN_ZERO
    } else {
        Constraints::NONE
    }
}

/// Max over random unit-`H^s` inputs of `‖op_{t,r}(f...)‖_{H^s}` for dyadic
/// `t - r ∈ [T/256, T]`, with the fitted `(t - r)` exponent. Passes when the
/// exponent is at least `gamma - 0.15`.
pub fn operator_norm_probe(
    ctx: &OperatorContext,
    tag: OperatorTag,
    s: f64,
    gamma: f64,
    sample_count: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    let eq = ctx.equation();
    if !tag.applies_to(eq) {
        return invalid(format!("operator {tag} is not defined for {eq}"));
    }
    if sample_count == 0 {
        return invalid("sample_count must be at least 1");
    }
    let horizon = ctx.path().horizon();
    let cons = input_constraints(eq);
    let n = ctx.max_mode();
    let root = derive_seed(seed, stream::PROBE);
    let mut lengths = Vec::new();
    let mut maxima = Vec::new();
    for level in 0..PROBE_LEVELS {
        let d = horizon / f64::from(1u32 << level);
        let mut rng = rng_from_seed(derive_seed(root, u64::from(level)));
        let positions: Vec<f64> = (0..POSITIONS)
            .map(|_| {
                use rand::Rng;
                let r: f64 = rng.random_range(0.0..=1.0);
                (r * (horizon - d)).max(0.0)
            })
            .collect();
        let ratios = (0..sample_count)
            .into_par_iter()
            .map(|i| {
                let r = positions[i % POSITIONS];
                let t = (r + d).min(horizon);
                let base = derive_seed(root, (u64::from(level) << 32) | i as u64);
                let inputs = (0..tag.arity())
                    .map(|k| {
                        let f = random_field(n, Profile::White, derive_seed(base, k as u64), cons)?;
                        let norm = f.sobolev_norm(s);
                        Ok(f.scale(crate::C64::new(1.0 / norm, 0.0)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(tag.apply(ctx, r, t, &inputs)?.sobolev_norm(s))
            })
            .collect::<Result<Vec<f64>>>()?;
        lengths.push(d);
        maxima.push(ratios.into_iter().fold(0.0, f64::max));
    }
    ConvergenceReport::new(
        lengths,
        maxima,
        format!("{tag} on {eq}, s={s}, {sample_count} samples per level"),
        Thresholds { min_rate: Some(gamma - 0.15), max_terminal: None },
    )
}
