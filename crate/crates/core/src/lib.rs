//! A numerical laboratory for the planar eikonal equation `|m| = 1`, `div m = 0`.
//!
//! The crate builds entropies from circle functions, measures entropy
//! production of grid-sampled unit fields, constructs the kinetic measure of
//! single jumps, evaluates the interaction quantity that controls cubic
//! increments, and computes the jump cost function. Every construction is
//! paired with an independent numerical check; the [`acceptance`] module
//! collects those checks into a machine-readable report.
//!
//! Modules, bottom-up:
//!
//! * [`circlegeom`]: trigonometric polynomials and quadrature on the circle.
//! * [`entropy`]: the linear family `f -> Phi_f`, Jin-Kohn entropies, jump pairings.
//! * [`fields`]: angle fields on the unit square, mollification, increments.
//! * [`production`]: entropy-production measures, least upper bounds, Besov estimators.
//! * [`kinetic`]: Maxwellian, kinetic measure of a jump, weak residuals.
//! * [`interaction`]: the kernel, the closed-form interaction `Xi`, quartic diagnostics.
//! * [`cost`]: the jump cost `c(s)` and its profile `g_beta`.

pub mod acceptance;
pub mod circlegeom;
pub mod config;
pub mod cost;
pub mod entropy;
mod error;
pub mod fields;
pub mod interaction;
pub mod io;
pub mod kinetic;
pub mod production;
mod fft;

pub use config::ExperimentConfig;
pub use circlegeom::{Angle, TrigPolynomial, UnitVec};
pub use entropy::{Entropy, EntropySource, JumpConfig};
pub use error::{LabError, Result};
pub use fields::{AngleField, Mollifier, VecField};
pub use kinetic::KineticDensity;
pub use production::GridMeasure;
