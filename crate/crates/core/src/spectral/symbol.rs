use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Real Fourier symbol `φ(n)` of the dispersion operator. The propagator
/// multiplies mode `n` by `exp(i w φ(n))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DispersionSymbol {
    Kdv,
    BenjaminOno,
    Ilw { depth: f64 },
    Schrodinger,
}

/// `coth(x) - 1/x` for `x > 0`.
fn coth_minus_inverse(x: f64) -> f64 {
    if x < 0.05 {
        let x2 = x * x;
        x * (1.0 / 3.0 - x2 * (1.0 / 45.0 - x2 * (2.0 / 945.0 - x2 / 4725.0)))
    } else {
        // coth x = 1 + 2 / (e^{2x} - 1), finite for large x.
        1.0 + 2.0 / (2.0 * x).exp_m1() - 1.0 / x
    }
}

/// `coth(x)` for `x != 0`, via `expm1` so large and small arguments are both
/// safe.
pub fn coth(x: f64) -> f64 {
    let s = x.signum();
    s * (1.0 + 2.0 / (2.0 * x.abs()).exp_m1())
}

impl DispersionSymbol {
    pub fn value(&self, n: i64) -> f64 {
        let x = n as f64;
        match *self {
            Self::Kdv => x * x * x,
            Self::BenjaminOno => x.abs() * x,
            Self::Ilw { depth } => {
                if n == 0 {
                    0.0
                } else {
                    // n^2 coth(δn) - n/δ = n^2 (coth(δ|n|) - 1/(δ|n|)) sgn(n)
                    let a = x.abs();
                    x.signum() * a * a * coth_minus_inverse(depth * a)
                }
            }
            Self::Schrodinger => -x * x,
        }
    }

    pub fn is_odd(&self) -> bool {
        !matches!(self, Self::Schrodinger)
    }

    /// Whether `φ` takes integer values, so resonance arithmetic is exact.
    pub fn is_integral(&self) -> bool {
        !matches!(self, Self::Ilw { .. })
    }
}

/// The five modulated equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EquationKind {
    Kdv,
    BenjaminOno,
    Ilw { depth: f64 },
    Dnls,
    Nls,
}

impl EquationKind {
    pub fn ilw(depth: f64) -> Result<Self> {
        if !(depth.is_finite() && depth > 0.0) {
            return invalid(format!("ILW depth must be positive, got {depth}"));
        }
        Ok(Self::Ilw { depth })
    }

    pub fn symbol(&self) -> DispersionSymbol {
        match *self {
            Self::Kdv => DispersionSymbol::Kdv,
            Self::BenjaminOno => DispersionSymbol::BenjaminOno,
            Self::Ilw { depth } => DispersionSymbol::Ilw { depth },
            Self::Dnls | Self::Nls => DispersionSymbol::Schrodinger,
        }
    }

    /// Equations with a quadratic nonlinearity `m(n) Σ u(n1) u(n2)`.
    pub fn is_quadratic(&self) -> bool {
        !matches!(self, Self::Nls)
    }

    /// Sums run over nonzero frequencies and data must be mean-zero.
    pub fn requires_mean_zero(&self) -> bool {
        self.is_quadratic()
    }

    /// Real initial data stay real under the flow.
    pub fn preserves_reality(&self) -> bool {
        matches!(self, Self::Kdv | Self::BenjaminOno | Self::Ilw { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Kdv => "kdv",
            Self::BenjaminOno => "bo",
            Self::Ilw { .. } => "ilw",
            Self::Dnls => "dnls",
            Self::Nls => "nls",
        }
    }
}

impl fmt::Display for EquationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ilw { depth } => write!(f, "ilw({depth})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Parses `kdv`, `bo`, `dnls`, `nls`, `ilw(<depth>)`.
impl FromStr for EquationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "kdv" => Ok(Self::Kdv),
            "bo" | "benjamin-ono" => Ok(Self::BenjaminOno),
            "dnls" => Ok(Self::Dnls),
            "nls" => Ok(Self::Nls),
            _ => {
                if let Some(inner) = s.strip_prefix("ilw(").and_then(|r| r.strip_suffix(')')) {
                    let depth = inner
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidArgument(format!("bad ILW depth: {e}")))?;
                    Self::ilw(depth)
                } else {
                    invalid(format!("unknown equation kind '{s}'"))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        assert_eq!(DispersionSymbol::Kdv.value(2), 8.0);
        assert_eq!(DispersionSymbol::BenjaminOno.value(-3), -9.0);
        assert_eq!(DispersionSymbol::Schrodinger.value(-3), -9.0);
        let ilw = DispersionSymbol::Ilw { depth: 1.0 };
        assert_eq!(ilw.value(0), 0.0);
        // coth(1) - 1
        let expected = 1.0f64.cosh() / 1.0f64.sinh() - 1.0;
        assert!((ilw.value(1) - expected).abs() < 1e-15);
        assert!((ilw.value(1) - 0.313_035_285_499_331_3).abs() < 1e-15);
    }

    #[test]
    fn ilw_is_odd_and_smooth_across_series_switch() {
        let shallow = DispersionSymbol::Ilw { depth: 1e-3 };
        for n in 1..40 {
            assert_eq!(shallow.value(-n), -shallow.value(n));
        }
        let below = coth_minus_inverse(0.05 * (1.0 - 1e-12));
        let above = coth_minus_inverse(0.05);
        assert!((below - above).abs() < 1e-13);
        let huge = DispersionSymbol::Ilw { depth: 1e6 };
        assert!(huge.value(5).is_finite());
    }

    #[test]
    fn coth_matches_definition() {
        for x in [-3.0, -0.2, 1e-4, 0.7, 40.0] {
            let direct = f64::cosh(x) / f64::sinh(x);
            assert!((coth(x) - direct).abs() < 1e-12 * direct.abs());
        }
    }

    #[test]
    fn parse_round_trip() {
        for k in [EquationKind::Kdv, EquationKind::BenjaminOno, EquationKind::Dnls, EquationKind::Nls] {
            assert_eq!(k.to_string().parse::<EquationKind>().unwrap(), k);
        }
        assert_eq!("ILW(2.5)".parse::<EquationKind>().unwrap(), EquationKind::Ilw { depth: 2.5 });
        assert!("ilw(-1)".parse::<EquationKind>().is_err());
        assert!("burgers".parse::<EquationKind>().is_err());
    }
}
