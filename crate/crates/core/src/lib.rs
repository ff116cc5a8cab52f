//! Fourier–Galerkin solvers for dispersive equations on the circle whose
//! linear dispersion is modulated by a rough time path.
//!
//! Supported equations: KdV, Benjamin–Ono, intermediate long wave,
//! derivative NLS and cubic NLS. Everything works in the interaction
//! representation `u(t) = U(t)^{-1} u_phys(t)` where `U(t)` multiplies mode
//! `n` by `exp(i w(t) φ(n))`.

pub mod diagnostics;
pub mod error;
pub mod fsio;
pub mod modulation;
pub mod operators;
pub mod rng;
pub mod solvers;
pub mod spectral;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use modulation::{generate_fbm, IrregularityEstimate, ModulationPath};
pub use operators::OperatorContext;
pub use solvers::{Quadrature, Scheme, SolverConfig, Trajectory};
pub use spectral::{
    random_field, Constraints, DispersionSymbol, EquationKind, Profile, SpectralField,
};
