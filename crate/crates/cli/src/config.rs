//! Experiment configuration: flat sections of `key = value` lines (TOML
//! syntax, no nested tables). Unknown sections and keys are rejected.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use modpde::diagnostics::{OperatorTag, Reference, StudySpec, Thresholds};
use modpde::rng::{derive_seed, stream};
use modpde::spectral::read_field;
use modpde::{
    generate_fbm, random_field, Constraints, EquationKind, ModulationPath, OperatorContext, Profile,
    Quadrature, Scheme, SolverConfig, SpectralField, C64,
};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub equation: EquationSection,
    pub path: PathSection,
    pub data: DataSection,
    pub solver: SolverSection,
    pub converge: ConvergeSection,
    pub irregularity: IrregularitySection,
    pub probe: ProbeSection,
    pub regime: RegimeSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: 7, out: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquationSection {
    pub kind: String,
    /// ILW depth δ.
    pub depth: Option<f64>,
    pub max_mode: usize,
}

impl Default for EquationSection {
    fn default() -> Self {
        Self { kind: "kdv".into(), depth: None, max_mode: 16 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathSection {
    /// `fbm`, `linear` or `file`.
    pub kind: String,
    pub hurst: f64,
    pub samples: usize,
    /// Defaults to the solver horizon `tau`.
    pub horizon: Option<f64>,
    /// Defaults to a seed derived from `run.seed`.
    pub seed: Option<u64>,
    pub slope: f64,
    pub file: Option<PathBuf>,
}

impl Default for PathSection {
    fn default() -> Self {
        Self {
            kind: "fbm".into(),
            hurst: 0.3,
            samples: 2049,
            horizon: None,
            seed: None,
            slope: 1.0,
            file: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    /// `zero`, `white`, `power_law`, `single_mode`, `coefficients` or `file`.
    pub profile: String,
    pub alpha: f64,
    pub mode: i64,
    /// Rows `[n, re, im]`.
    pub coefficients: Vec<(i64, f64, f64)>,
    pub file: Option<PathBuf>,
    /// Rescales the data to this L² norm.
    pub l2_norm: Option<f64>,
    pub seed: Option<u64>,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            profile: "single_mode".into(),
            alpha: 1.0,
            mode: 1,
            coefficients: Vec::new(),
            file: None,
            l2_norm: Some(1.0),
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tau: f64,
    pub scheme: String,
    pub steps: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub quadrature: String,
    pub substeps: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            tau: 0.05,
            scheme: d.scheme.name().into(),
            steps: d.step_count,
            picard_tol: d.picard_tol,
            picard_max_iter: d.picard_max_iter,
            quadrature: "trapezoid".into(),
            substeps: d.substeps,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeSection {
    pub schemes: Vec<String>,
    pub meshes: Vec<usize>,
    /// `run` (one fixed reference run) or `paired` (reference scheme on the same mesh).
    pub reference: String,
    pub reference_scheme: String,
    pub reference_steps: usize,
    pub min_rate: Option<f64>,
    pub max_terminal: Option<f64>,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        Self {
            schemes: vec!["euler_exponential".into(), "euler_corrected".into()],
            meshes: vec![16, 32, 64, 128],
            reference: "run".into(),
            reference_scheme: "normal_form".into(),
            reference_steps: 512,
            min_rate: Some(0.4),
            max_terminal: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IrregularitySection {
    pub ensemble: usize,
    pub gamma: f64,
    pub a_max: f64,
    /// Exponent for the norm estimate; defaults to the fitted `ρ̂`.
    pub rho: Option<f64>,
    pub time_nodes: Option<usize>,
}

impl Default for IrregularitySection {
    fn default() -> Self {
        Self { ensemble: 1, gamma: 0.55, a_max: 30.0, rho: None, time_nodes: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSection {
    /// Empty means every operator defined for the equation.
    pub tags: Vec<String>,
    pub s: f64,
    pub gamma: f64,
    pub samples: usize,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self { tags: Vec::new(), s: 0.0, gamma: 0.6, samples: 256 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegimeSection {
    /// Defaults to the fitted `ρ̂` of the configured path.
    pub rho: Option<f64>,
    pub gamma: f64,
    pub s: f64,
    pub s0: Option<f64>,
}

impl Default for RegimeSection {
    fn default() -> Self {
        Self { rho: None, gamma: 0.6, s: 0.0, s0: None }
    }
}

fn config_err<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Config(msg.into()))
}

fn parsed<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Config(e.to_string()))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        parsed(toml::from_str(text))
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Failure::Config(m) => Failure::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn equation(&self) -> Result<EquationKind, Failure> {
        let kind = self.equation.kind.trim().to_ascii_lowercase();
        match (kind.as_str(), self.equation.depth) {
            ("ilw", Some(depth)) => parsed(EquationKind::ilw(depth)),
            ("ilw", None) => config_err("equation.kind = \"ilw\" needs equation.depth"),
            (_, Some(_)) => config_err("equation.depth only applies to ilw"),
            (other, None) => parsed(other.parse()),
        }
    }

    pub fn tau(&self) -> Result<f64, Failure> {
        let tau = self.solver.tau;
        if !(tau.is_finite() && tau > 0.0) {
            return config_err(format!("solver.tau must be positive, got {tau}"));
        }
        Ok(tau)
    }

    pub fn solver_config(&self) -> Result<SolverConfig, Failure> {
        let s = &self.solver;
        let cfg = SolverConfig {
            step_count: s.steps,
            picard_tol: s.picard_tol,
            picard_max_iter: s.picard_max_iter,
            quadrature: parsed(s.quadrature.parse::<Quadrature>())?,
            scheme: parsed(s.scheme.parse::<Scheme>())?,
            substeps: s.substeps,
        };
        parsed(cfg.validate())?;
        Ok(cfg)
    }

    pub fn horizon(&self) -> Result<f64, Failure> {
        match self.path.horizon {
            Some(h) => Ok(h),
            None => self.tau(),
        }
    }

    pub fn path_seed(&self) -> u64 {
        self.path.seed.unwrap_or_else(|| derive_seed(self.run.seed, stream::PATH))
    }

    /// Whether the path section describes a random path (an ensemble makes sense).
    pub fn path_is_random(&self) -> bool {
        self.path.kind == "fbm"
    }

    pub fn build_path_with_seed(&self, seed: u64) -> Result<ModulationPath, Failure> {
        let p = &self.path;
        match p.kind.as_str() {
            "fbm" => parsed(generate_fbm(p.hurst, self.horizon()?, p.samples, seed)),
            "linear" => parsed(ModulationPath::linear(p.slope, self.horizon()?, p.samples)),
            "file" => {
                let Some(file) = &p.file else {
                    return config_err("path.kind = \"file\" needs path.file");
                };
                let f = fs::File::open(file)
                    .map_err(|e| Failure::Config(format!("cannot read {}: {e}", file.display())))?;
                parsed(modpde::modulation::read_path(BufReader::new(f)))
            }
            other => config_err(format!("unknown path.kind '{other}'")),
        }
    }

    pub fn build_path(&self) -> Result<ModulationPath, Failure> {
        self.build_path_with_seed(self.path_seed())
    }

    pub fn context(&self) -> Result<OperatorContext, Failure> {
        let path = self.build_path()?;
        parsed(OperatorContext::new(self.equation()?, Arc::new(path), self.equation.max_mode))
    }

    pub fn initial_data(&self) -> Result<SpectralField, Failure> {
        let eq = self.equation()?;
        let n = self.equation.max_mode;
        let cons = constraints_for(eq);
        let d = &self.data;
        let seed = d.seed.unwrap_or_else(|| derive_seed(self.run.seed, stream::DATA));
        let field = match d.profile.as_str() {
            "zero" => return Ok(SpectralField::zeros(n, cons)),
            "white" => parsed(random_field(n, Profile::White, seed, cons))?,
            "power_law" => parsed(random_field(n, Profile::PowerLaw { alpha: d.alpha }, seed, cons))?,
            "single_mode" => parsed(random_field(n, Profile::SingleMode { mode: d.mode }, seed, cons))?,
            "coefficients" => {
                let mut coeffs = vec![C64::new(0.0, 0.0); 2 * n + 1];
                for &(k, re, im) in &d.coefficients {
                    if k.unsigned_abs() as usize > n {
                        return config_err(format!("data coefficient at mode {k} outside band {n}"));
                    }
                    coeffs[(k + n as i64) as usize] = C64::new(re, im);
                }
                parsed(SpectralField::from_coeffs(n, coeffs, cons))?
            }
            "file" => {
                let Some(file) = &d.file else {
                    return config_err("data.profile = \"file\" needs data.file");
                };
                let f = fs::File::open(file)
                    .map_err(|e| Failure::Config(format!("cannot read {}: {e}", file.display())))?;
                let field = parsed(read_field(BufReader::new(f)))?;
                if field.max_mode() != n {
                    return config_err(format!("data file has band {}, config has {n}", field.max_mode()));
                }
                parsed(SpectralField::from_coeffs(n, field.coeffs().to_vec(), cons))?
            }
            other => return config_err(format!("unknown data.profile '{other}'")),
        };
        match d.l2_norm {
            Some(target) if !(target.is_finite() && target >= 0.0) => {
                config_err(format!("data.l2_norm must be non-negative, got {target}"))
            }
            Some(target) if !field.is_zero() => {
                Ok(field.scale(C64::new(target / field.l2_norm(), 0.0)))
            }
            _ => Ok(field),
        }
    }

    pub fn study_specs(&self) -> Result<Vec<StudySpec>, Failure> {
        let c = &self.converge;
        let scheme = parsed(c.reference_scheme.parse::<Scheme>())?;
        let reference = match c.reference.as_str() {
            "run" => Reference::Run { scheme, steps: c.reference_steps },
            "paired" => Reference::Paired(scheme),
            other => return config_err(format!("unknown converge.reference '{other}'")),
        };
        let thresholds = Thresholds { min_rate: c.min_rate, max_terminal: c.max_terminal };
        if c.schemes.is_empty() {
            return config_err("converge.schemes is empty");
        }
        c.schemes
            .iter()
            .map(|s| {
                let spec = StudySpec {
                    scheme: parsed(s.parse::<Scheme>())?,
                    meshes: c.meshes.clone(),
                    reference,
                    thresholds,
                };
                parsed(spec.validate())?;
                Ok(spec)
            })
            .collect()
    }

    pub fn probe_tags(&self) -> Result<Vec<OperatorTag>, Failure> {
        let eq = self.equation()?;
        if self.probe.tags.is_empty() {
            return Ok(OperatorTag::for_equation(eq));
        }
        self.probe
            .tags
            .iter()
            .map(|t| {
                let tag: OperatorTag = parsed(t.parse())?;
                if !tag.applies_to(eq) {
                    return config_err(format!("operator {tag} is not defined for {eq}"));
                }
                Ok(tag)
            })
            .collect()
    }
}

pub fn constraints_for(eq: EquationKind) -> Constraints {
    match eq {
        EquationKind::Nls => Constraints::NONE,
        EquationKind::Dnls => Constraints::MEAN_ZERO,
        _ => Constraints::REAL_MEAN_ZERO,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_the_desk_kdv_case() {
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg.equation().unwrap(), EquationKind::Kdv);
        assert_eq!(cfg.equation.max_mode, 16);
        assert_eq!(cfg.tau().unwrap(), 0.05);
        let u0 = cfg.initial_data().unwrap();
        assert!((u0.get(1).re - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(u0.get(1), u0.get(-1));
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        assert!(ExperimentConfig::parse("[solver]\nstep = 4\n").is_err());
        assert!(ExperimentConfig::parse("[extra]\na = 1\n").is_err());
        assert!(ExperimentConfig::parse("[solver]\ntau = \"x\"\n").is_err());
    }

    #[test]
    fn ilw_needs_depth() {
        let mut cfg = ExperimentConfig::parse("[equation]\nkind = \"ilw\"\n").unwrap();
        assert!(cfg.equation().is_err());
        cfg.equation.depth = Some(2.0);
        assert_eq!(cfg.equation().unwrap(), EquationKind::Ilw { depth: 2.0 });
    }

    #[test]
    fn coefficient_data() {
        let text = "[equation]\nkind = \"nls\"\n[data]\nprofile = \"coefficients\"\n\
                    coefficients = [[1, 0.8, 0.0], [-2, 0.0, 0.6]]\n";
        let u0 = ExperimentConfig::parse(text).unwrap().initial_data().unwrap();
        assert_eq!(u0.get(1), C64::new(0.8, 0.0));
        assert_eq!(u0.get(-2), C64::new(0.0, 0.6));
    }

    #[test]
    fn derived_seeds_follow_the_root() {
        let a = ExperimentConfig::parse("[run]\nseed = 1\n").unwrap();
        let b = ExperimentConfig::parse("[run]\nseed = 2\n").unwrap();
        assert_ne!(a.path_seed(), b.path_seed());
        let pinned = ExperimentConfig::parse("[run]\nseed = 1\n[path]\nseed = 5\n").unwrap();
        assert_eq!(pinned.path_seed(), 5);
    }
}
