use num_complex::Complex64 as C64;

use super::{resonance_cubic_nls, OperatorContext};
use crate::error::Result;
use crate::spectral::{Constraints, SpectralField};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Resonant part of the renormalized cubic nonlinearity,
/// `i f1(n) conj(f2(n)) f3(n)` pointwise in `n`.
pub fn resonant_cubic(
    f1: &SpectralField,
    f2: &SpectralField,
    f3: &SpectralField,
) -> Result<SpectralField> {
    f1.same_band(f2)?;
    f1.same_band(f3)?;
    let mut out = SpectralField::zeros(f1.max_mode(), Constraints::NONE);
    for ((o, a), (b, c)) in out
        .coeffs_mut()
        .iter_mut()
        .zip(f1.coeffs())
        .zip(f2.coeffs().iter().zip(f3.coeffs()))
    {
        *o = I * a * b.conj() * c;
    }
    Ok(out)
}

impl OperatorContext {
    fn nls_field(&self, coeffs: Vec<C64>) -> SpectralField {
        let mut f = SpectralField::zeros(self.max_mode(), Constraints::NONE);
        f.coeffs_mut().copy_from_slice(&coeffs);
        f
    }

    fn nls_prelude(&self, r: f64, t: f64, fields: &[&SpectralField]) -> Result<Option<(f64, f64)>> {
        self.require_nls()?;
        self.check_band(fields)?;
        let (r, t) = self.interval(r, t)?;
        Ok((r < t).then_some((r, t)))
    }

    /// Non-resonant cubic driver
    /// `X_{t,r}(f1, f2, f3)(n) = -i Σ Φ_{t,r}(Ξ(n, n1, n2, n3)) f1(n1) conj(f2(n2)) f3(n3)`
    /// over `n = n1 - n2 + n3`, `n ∉ {n1, n3}`.
    pub fn trilinear_nonresonant_nls(
        &self,
        r: f64,
        t: f64,
        f1: &SpectralField,
        f2: &SpectralField,
        f3: &SpectralField,
    ) -> Result<SpectralField> {
        let Some((r, t)) = self.nls_prelude(r, t, &[f1, f2, f3])? else {
            return Ok(SpectralField::zeros(self.max_mode(), Constraints::NONE));
        };
        let st = self.triple_stencil();
        let phases = self.triple_phases(r, t);
        let mut out = st.triple_sum(&phases, f1.coeffs(), f2.coeffs(), f3.coeffs());
        for o in &mut out {
            *o *= -I;
        }
        Ok(self.nls_field(out))
    }

    /// Quintic operator `𝒩𝒩_{t,r}` coming from substituting the equation
    /// into the non-resonant driver (two terms, the second through the
    /// conjugated slot).
    pub fn quintic_nn(&self, r: f64, t: f64, f: [&SpectralField; 5]) -> Result<SpectralField> {
        let Some((r, t)) = self.nls_prelude(r, t, &f)? else {
            return Ok(SpectralField::zeros(self.max_mode(), Constraints::NONE));
        };
        let st = self.triple_stencil();
        let inner = st.cis_weights(self.path().value_at(r)?);
        let c = st.triple_sum(&inner, f[0].coeffs(), f[1].coeffs(), f[2].coeffs());
        let e = st.triple_sum(&inner, f[1].coeffs(), f[2].coeffs(), f[3].coeffs());
        let phases = self.triple_phases(r, t);
        let first = st.triple_sum(&phases, &c, f[3].coeffs(), f[4].coeffs());
        let second = st.triple_sum(&phases, f[0].coeffs(), &e, f[4].coeffs());
        let out = first
            .iter()
            .zip(&second)
            .map(|(a, b)| -2.0 * a + b)
            .collect();
        Ok(self.nls_field(out))
    }

    /// `𝒩𝒩_{t,r}(v, ..., v) + 𝒩ℛ_{t,r}(v, ..., v)` in one pass. With
    /// `G = C - |v|²v`, where `C` is the inner non-resonant sum, the two
    /// operators combine into `-2 S(G, v, v) + S(v, G, v)`.
    pub fn quintic_diagonal(&self, r: f64, t: f64, v: &SpectralField) -> Result<SpectralField> {
        let Some((r, t)) = self.nls_prelude(r, t, &[v])? else {
            return Ok(SpectralField::zeros(self.max_mode(), Constraints::NONE));
        };
        let st = self.triple_stencil();
        let u = v.coeffs();
        let inner = st.cis_weights(self.path().value_at(r)?);
        let c = st.triple_sum(&inner, u, u, u);
        let g: Vec<C64> = c.iter().zip(u).map(|(c, x)| c - x * x.conj() * x).collect();
        let phases = self.triple_phases(r, t);
        let first = st.triple_sum(&phases, &g, u, u);
        let second = st.triple_sum(&phases, u, &g, u);
        let out = first.iter().zip(&second).map(|(a, b)| -2.0 * a + b).collect();
        Ok(self.nls_field(out))
    }

    /// Quintic operator `𝒩ℛ_{t,r}` coming from substituting the resonant
    /// part into the non-resonant driver:
    /// `2 Σ Φ(Ξ(n, n1, n4, n5)) [f1 conj(f2) f3](n1) conj(f4(n4)) f5(n5)
    ///  - Σ Φ(Ξ(n, n1, n2, n5)) f1(n1) conj([f2 conj(f3) f4](n2)) f5(n5)`.
    pub fn quintic_nr(&self, r: f64, t: f64, f: [&SpectralField; 5]) -> Result<SpectralField> {
        let Some((r, t)) = self.nls_prelude(r, t, &f)? else {
            return Ok(SpectralField::zeros(self.max_mode(), Constraints::NONE));
        };
        let st = self.triple_stencil();
        let phases = self.triple_phases(r, t);
        let nn = self.max_mode() as i64;
        let at = |g: &SpectralField, k: i64| g.get(k);
        let mut out = vec![C64::new(0.0, 0.0); 2 * self.max_mode() + 1];
        for (i, o) in out.iter_mut().enumerate() {
            let n = i as i64 - nn;
            let mut acc = C64::new(0.0, 0.0);
            for n1 in -nn..=nn {
                if n1 == n {
                    continue;
                }
                for n5 in -nn..=nn {
                    let mid = n1 + n5 - n;
                    if n5 == n || mid.abs() > nn {
                        continue;
                    }
                    let key = st
                        .key_index(resonance_cubic_nls(n, n1, mid, n5) as f64)
                        .expect("non-resonant key present in stencil");
                    let phi = phases[key];
                    let cubic_first = at(f[0], n1) * at(f[1], n1).conj() * at(f[2], n1);
                    let cubic_mid = at(f[1], mid) * at(f[2], mid).conj() * at(f[3], mid);
                    acc += phi
                        * (2.0 * cubic_first * at(f[3], mid).conj() * at(f[4], n5)
                            - at(f[0], n1) * cubic_mid.conj() * at(f[4], n5));
                }
            }
            *o = acc;
        }
        Ok(self.nls_field(out))
    }
}
