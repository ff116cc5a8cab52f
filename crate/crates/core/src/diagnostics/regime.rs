use std::fmt;

use crate::error::{invalid, Result};
use crate::spectral::EquationKind;

/// One hypothesis set and whether `(ρ, γ, s, s0)` satisfies it.
#[derive(Debug, Clone, PartialEq)]
pub struct Claim {
    pub tag: &'static str,
    pub statement: &'static str,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeVerdict {
    pub equation: EquationKind,
    pub rho: f64,
    pub gamma: f64,
    pub s: f64,
    pub s0: Option<f64>,
    pub claims: Vec<Claim>,
}

impl RegimeVerdict {
    pub fn claim(&self, tag: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.tag == tag)
    }

    pub fn satisfied(&self, tag: &str) -> bool {
        self.claim(tag).is_some_and(|c| c.satisfied)
    }
}

impl fmt::Display for RegimeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} rho={} gamma={} s={}", self.equation, self.rho, self.gamma, self.s)?;
        for c in &self.claims {
            writeln!(f, "  {:<24} {:<5} {}", c.tag, c.satisfied, c.statement)?;
        }
        Ok(())
    }
}

fn claim(tag: &'static str, statement: &'static str, satisfied: bool) -> Claim {
    Claim { tag, statement, satisfied }
}

/// Evaluates the well-posedness, unconditional uniqueness and smoothing
/// hypotheses that apply to `equation`, literally and without slack. The
/// smoothing claim is only listed when `s0` is given.
pub fn regime_check(equation: EquationKind, rho: f64, gamma: f64, s: f64, s0: Option<f64>) -> Result<RegimeVerdict> {
    if !(gamma > 0.5 && gamma < 1.0) {
        return invalid(format!("gamma must lie in (1/2, 1), got {gamma}"));
    }
    if !(rho.is_finite() && s.is_finite() && s0.is_none_or(f64::is_finite)) {
        return invalid("rho, s and s0 must be finite");
    }
    let mut claims = Vec::new();
    match equation {
        EquationKind::Kdv => {
            claims.push(claim(
                "lwp_kdv_moderate",
                "1/2 <= rho <= 3/4 and s > 3/2 - 3 rho",
                (0.5..=0.75).contains(&rho) && s > 1.5 - 3.0 * rho,
            ));
            claims.push(claim("lwp_kdv_strong", "rho > 3/4 and s >= -rho", rho > 0.75 && s >= -rho));
            claims.push(claim("uu_kdv", "rho > 5/4 and s >= 0", rho > 1.25 && s >= 0.0));
            if let Some(s0) = s0 {
                claims.push(claim(
                    "smoothing_kdv",
                    "rho > 5/4, s >= 0, s < s0 < s + 2 rho - 5/2",
                    rho > 1.25 && s >= 0.0 && s0 > s && s0 < s + 2.0 * rho - 2.5,
                ));
            }
        }
        EquationKind::BenjaminOno | EquationKind::Ilw { .. } => {
            claims.push(claim("lwp_bo_critical", "rho = 1 and s > -1/2", rho == 1.0 && s > -0.5));
            claims.push(claim("lwp_bo_strong", "rho > 1 and s >= -rho/2", rho > 1.0 && s >= -0.5 * rho));
            claims.push(claim("uu_bo", "rho > 5/2 and s >= 0", rho > 2.5 && s >= 0.0));
            if let Some(s0) = s0 {
                claims.push(claim(
                    "smoothing_bo",
                    "rho > 5/2, s >= 0, s0 <= rho - 1, s0 < s + rho - 5/2",
                    rho > 2.5 && s >= 0.0 && s0 <= rho - 1.0 && s0 < s + rho - 2.5,
                ));
            }
        }
        EquationKind::Dnls => {
            claims.push(claim("uu_dnls", "rho > 5/2 and s >= 0", rho > 2.5 && s >= 0.0));
            if let Some(s0) = s0 {
                claims.push(claim(
                    "smoothing_dnls",
                    "rho > 5/2, s >= 0, s0 <= rho - 1, s0 < s + rho - 5/2",
                    rho > 2.5 && s >= 0.0 && s0 <= rho - 1.0 && s0 < s + rho - 2.5,
                ));
            }
        }
        EquationKind::Nls => {
            claims.push(claim("uu_nls", "rho > 2/3 and s >= 1/6", rho > 2.0 / 3.0 && s >= 1.0 / 6.0));
        }
    }
    Ok(RegimeVerdict { equation, rho, gamma, s, s0, claims })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_examples() {
        let v = regime_check(EquationKind::Kdv, 1.3, 0.6, 0.0, None).unwrap();
        assert!(v.satisfied("uu_kdv"));
        let v = regime_check(EquationKind::Kdv, 0.6, 0.6, -0.2, None).unwrap();
        assert!(v.satisfied("lwp_kdv_moderate"));
        assert!(!v.satisfied("lwp_kdv_strong"));
        let v = regime_check(EquationKind::Kdv, 0.6, 0.6, -0.3, None).unwrap();
        assert!(!v.satisfied("lwp_kdv_moderate"));
        let v = regime_check(EquationKind::Nls, 0.5, 0.6, 1.0 / 6.0, None).unwrap();
        assert!(!v.satisfied("uu_nls"));
        let v = regime_check(EquationKind::Nls, 0.7, 0.6, 1.0 / 6.0, None).unwrap();
        assert!(v.satisfied("uu_nls"));
    }

    #[test]
    fn bo_thresholds_are_strict_where_stated() {
        assert!(regime_check(EquationKind::BenjaminOno, 1.0, 0.7, -0.49, None).unwrap().satisfied("lwp_bo_critical"));
        assert!(!regime_check(EquationKind::BenjaminOno, 1.0, 0.7, -0.5, None).unwrap().satisfied("lwp_bo_critical"));
        assert!(regime_check(EquationKind::ilw(2.0).unwrap(), 2.0, 0.7, -1.0, None).unwrap().satisfied("lwp_bo_strong"));
        assert!(!regime_check(EquationKind::BenjaminOno, 2.5, 0.7, 0.0, None).unwrap().satisfied("uu_bo"));
    }

    #[test]
    fn smoothing_claims() {
        let v = regime_check(EquationKind::Kdv, 2.0, 0.6, 0.0, Some(1.0)).unwrap();
        assert!(v.satisfied("smoothing_kdv"));
        let v = regime_check(EquationKind::Kdv, 2.0, 0.6, 0.0, Some(1.5)).unwrap();
        assert!(!v.satisfied("smoothing_kdv"));
        let v = regime_check(EquationKind::Dnls, 3.0, 0.6, 0.0, Some(0.4)).unwrap();
        assert!(v.satisfied("smoothing_dnls"));
        assert!(regime_check(EquationKind::Kdv, 2.0, 0.6, 0.0, None).unwrap().claim("smoothing_kdv").is_none());
    }

    #[test]
    fn gamma_outside_range_rejected() {
        assert!(regime_check(EquationKind::Kdv, 1.0, 0.5, 0.0, None).is_err());
        assert!(regime_check(EquationKind::Kdv, 1.0, 1.0, 0.0, None).is_err());
    }
}
