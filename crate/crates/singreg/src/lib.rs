//! Regularizing correlation functions for highly singular pair potentials.
//!
//! A pair potential diverging as `x^-n` at short distance (n larger than the
//! spatial dimension) is not integrable: `∫ v(x) x^{d-1} dx` blows up at the
//! core, which breaks any mean-field treatment that needs that integral. This
//! crate builds the correlation function `g(x)` that repairs this. `g` comes
//! from the zero-energy two-body scattering solution: near the core the
//! scattering wave dies out with an essential singularity, and `g = |φ|²`
//! inherits exactly the decay needed to make the regularized potential
//! `Φ = g·v` integrable while leaving the tail of `v` untouched.
//!
//! The pipeline:
//!
//! 1. [`potentials`] defines the dimensionless potentials `v(x)`, the
//!    slow/fast core split `s(x) = sgn(v)·√(xⁿ|v|)`, and the reduction of
//!    physical parameters to the single coupling `Λ = 1/(σ√(mε))`.
//! 2. [`series`] expands the scattering solution near the core: a power
//!    prefactor, a short series in `x^{n/2-1}`, and the essential-singularity
//!    exponent.
//! 3. [`factor`] extrapolates that series to all distances with self-similar
//!    factor approximants `f₀·∏(1+Aⱼx)^{nⱼ}`, trained on the series
//!    coefficients and pinned by the large-distance boundary behavior.
//! 4. [`correlation`] assembles `g(x)`, the regularized potential `Φ`, an
//!    integrability verifier, and a `g(1-g)` smallness diagnostic.
//! 5. [`oracle`] and [`quad`] are the independent checks: a direct adaptive
//!    integration of the scattering ODE and an adaptive quadrature, used to
//!    validate every analytic step numerically.
//! 6. [`materials`] carries the Λ values for the quantum fluids of interest
//!    (helium isotopes and spin-polarized hydrogen isotopes).
//!
//! The crate ships a CLI (`singreg`) that emits curve data as CSV and runs
//! the verification suite; see the README for usage.

pub mod correlation;
pub mod error;
pub mod factor;
pub mod grid;
pub mod materials;
pub mod oracle;
pub mod potentials;
pub mod quad;
pub mod series;

pub use correlation::{bare_integral, CorrelationModel, IntegrabilityReport, SmallnessReport};
pub use error::{Error, Result};
pub use factor::{BoundaryData, FactorApproximant, Prefactor, SeriesInput};
pub use materials::{Material, MaterialRegistry};
pub use oracle::OracleSolution;
pub use potentials::{PhysicalParams, PotentialSpec};
pub use series::ShortRangeExpansion;
