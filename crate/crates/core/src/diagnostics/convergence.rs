use super::report::{ConvergenceReport, Thresholds};
use crate::error::{invalid, Result};
use crate::operators::OperatorContext;
use crate::solvers::{solve, Scheme, SolverConfig};
use crate::spectral::SpectralField;

/// What each run is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// One run of `scheme` with `steps` steps.
    Run { scheme: Scheme, steps: usize },
    /// A run of another scheme on the same mesh.
    Paired(Scheme),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec {
    pub scheme: Scheme,
    /// Strictly increasing step counts; at least 3.
    pub meshes: Vec<usize>,
    pub reference: Reference,
    pub thresholds: Thresholds,
}

impl StudySpec {
    pub fn validate(&self) -> Result<()> {
        if self.meshes.len() < 3 {
            return invalid(format!("a convergence study needs at least 3 meshes, got {}", self.meshes.len()));
        }
        if self.meshes[0] == 0 || self.meshes.windows(2).any(|w| w[1] <= w[0]) {
            return invalid(format!("meshes must be positive and strictly increasing, got {:?}", self.meshes));
        }
        if let Reference::Run { steps: 0, .. } = self.reference {
            return invalid("reference run needs at least one step");
        }
        Ok(())
    }
}

/// L² error of `u(τ)` against the reference for every mesh, with the fitted
/// rate against the step size `τ / K`.
pub fn convergence_study(
    ctx: &OperatorContext,
    u0: &SpectralField,
    tau: f64,
    base: &SolverConfig,
    spec: &StudySpec,
) -> Result<ConvergenceReport> {
    spec.validate()?;
    let final_state = |scheme: Scheme, steps: usize| -> Result<SpectralField> {
        let cfg = base.with_steps(steps).with_scheme(scheme);
        Ok(solve(ctx, u0, tau, &cfg)?.final_state().clone())
    };
    let fixed = match spec.reference {
        Reference::Run { scheme, steps } => Some(final_state(scheme, steps)?),
        Reference::Paired(_) => None,
    };
    let mut sizes = Vec::with_capacity(spec.meshes.len());
    let mut errors = Vec::with_capacity(spec.meshes.len());
    for &k in &spec.meshes {
        let u = final_state(spec.scheme, k)?;
        let err = match (&fixed, spec.reference) {
            (Some(reference), _) => (&u - reference).l2_norm(),
            (None, Reference::Paired(other)) => (&u - &final_state(other, k)?).l2_norm(),
            _ => unreachable!("reference kind and fixed run agree"),
        };
        sizes.push(tau / k as f64);
        errors.push(err);
    }
    let reference = match spec.reference {
        Reference::Run { scheme, steps } => format!("{} vs {scheme} at K={steps}", spec.scheme),
        Reference::Paired(other) => format!("{} vs {other} at equal K", spec.scheme),
    };
    ConvergenceReport::new(sizes, errors, reference, spec.thresholds)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::modulation::generate_fbm;
    use crate::spectral::{random_field, Constraints, EquationKind, Profile};

    fn setup() -> (OperatorContext, SpectralField) {
        let path = generate_fbm(0.3, 0.05, 257, 3).unwrap();
        let ctx = OperatorContext::new(EquationKind::Kdv, Arc::new(path), 6).unwrap();
        let u0 = random_field(6, Profile::White, 2, Constraints::REAL_MEAN_ZERO).unwrap();
        let u0 = u0.scale(crate::C64::new(1.0 / u0.l2_norm(), 0.0));
        (ctx, u0)
    }

    #[test]
    fn scheme_against_itself_is_exact() {
        let (ctx, u0) = setup();
        let spec = StudySpec {
            scheme: Scheme::RiemannMild,
            meshes: vec![4, 8, 16],
            reference: Reference::Paired(Scheme::EulerExponential),
            thresholds: Thresholds::default(),
        };
        let r = convergence_study(&ctx, &u0, 0.05, &SolverConfig::default(), &spec).unwrap();
        assert!(r.errors.iter().all(|&e| e == 0.0));
        assert_eq!(r.fitted_rate, f64::INFINITY);
    }

    #[test]
    fn riemann_sums_converge_to_the_normal_form() {
        let path = generate_fbm(0.3, 0.05, 2049, 3).unwrap();
        let ctx = OperatorContext::new(EquationKind::Kdv, Arc::new(path), 8).unwrap();
        let mut u0 = SpectralField::zeros(8, Constraints::REAL_MEAN_ZERO);
        u0.set(1, crate::C64::new(0.5f64.sqrt(), 0.0));
        u0.set(-1, crate::C64::new(0.5f64.sqrt(), 0.0));
        let spec = StudySpec {
            scheme: Scheme::RiemannMild,
            meshes: vec![16, 32, 64, 128],
            reference: Reference::Run { scheme: Scheme::NormalForm, steps: 512 },
            thresholds: Thresholds { min_rate: Some(0.4), max_terminal: None },
        };
        let r = convergence_study(&ctx, &u0, 0.05, &SolverConfig::default(), &spec).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn invalid_mesh_families() {
        let (ctx, u0) = setup();
        let mut spec = StudySpec {
            scheme: Scheme::RiemannMild,
            meshes: vec![8],
            reference: Reference::Paired(Scheme::NormalForm),
            thresholds: Thresholds::default(),
        };
        assert!(convergence_study(&ctx, &u0, 0.05, &SolverConfig::default(), &spec).is_err());
        spec.meshes = vec![8, 16, 16];
        assert!(convergence_study(&ctx, &u0, 0.05, &SolverConfig::default(), &spec).is_err());
    }
}
