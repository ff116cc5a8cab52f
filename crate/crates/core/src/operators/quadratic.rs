use num_complex::Complex64 as C64;

use super::OperatorContext;
use crate::error::Result;
use crate::spectral::{Constraints, SpectralField};

impl OperatorContext {
    fn field_from(&self, coeffs: Vec<C64>, constraints: Constraints) -> SpectralField {
        let mut f = SpectralField::zeros(self.max_mode(), constraints);
        f.coeffs_mut().copy_from_slice(&coeffs);
        f
    }

    /// Quadratic driver
    /// `X_{t,r}(f1, f2)(n) = m(n) Σ_{n = n1 + n2} Φ_{t,r}(Ξ(n, n1, n2)) f1(n1) f2(n2)`
    /// over nonzero `n, n1, n2`.
    pub fn bilinear_driver(
        &self,
        r: f64,
        t: f64,
        f1: &SpectralField,
        f2: &SpectralField,
    ) -> Result<SpectralField> {
        self.require_quadratic()?;
        self.check_band(&[f1, f2])?;
        let (r, t) = self.interval(r, t)?;
        if r == t {
            return Ok(SpectralField::zeros(self.max_mode(), Constraints::MEAN_ZERO));
        }
        let st = self.pair_stencil();
        let phases = self.pair_phases(r, t);
        let mut out = st.pair_sum(&phases, f1.coeffs(), f2.coeffs());
        for (o, m) in out.iter_mut().zip(self.multipliers()) {
            *o *= m;
        }
        Ok(self.field_from(out, Constraints::MEAN_ZERO))
    }

    /// Trilinear operator of the normal-form equation
    /// `𝒩_{t,r}(f1, f2, f3)(n) = 2 m(n) Σ m(n12) Φ_{t,r}(Ξ(n, n12, n3)) e^{iΞ(n12, n1, n2) w(r)} f1(n1) f2(n2) f3(n3)`
    /// with `n12 = n1 + n2 ≠ 0`.
    pub fn trilinear_normal_form(
        &self,
        r: f64,
        t: f64,
        f1: &SpectralField,
        f2: &SpectralField,
        f3: &SpectralField,
    ) -> Result<SpectralField> {
        self.require_quadratic()?;
        self.check_band(&[f1, f2, f3])?;
        let (r, t) = self.interval(r, t)?;
        if r == t {
            return Ok(SpectralField::zeros(self.max_mode(), Constraints::MEAN_ZERO));
        }
        let st = self.pair_stencil();
        let w_r = self.path().value_at(r)?;
        let inner = st.pair_sum(&st.cis_weights(w_r), f1.coeffs(), f2.coeffs());
        let m = self.multipliers();
        let g: Vec<C64> = inner.iter().zip(&m).map(|(b, m)| b * m).collect();
        let phases = self.pair_phases(r, t);
        let mut out = st.pair_sum(&phases, &g, f3.coeffs());
        for (o, m) in out.iter_mut().zip(&m) {
            *o *= 2.0 * m;
        }
        Ok(self.field_from(out, Constraints::MEAN_ZERO))
    }
}
