//! Pole data of meromorphic matrix-valued families.
//!
//! The crate computes local Laurent data, numerical ranks, determinant
//! winding numbers and local Smith exponents of families `λ ↦ F(λ)` of
//! complex matrices, and uses them to compare resonance multiplicities with
//! scattering-pole multiplicities:
//!
//! * [`numerics`]: contour quadrature, pole-order detection, ranks, winding
//!   numbers, complex log-Gamma.
//! * [`smith`]: local Smith exponents from block-Toeplitz ranks and the
//!   multiplicity quantities derived from them.
//! * [`synth`]: seeded families with known factorization data.
//! * [`hypmodel`]: channel-diagonal scattering model of real hyperbolic space
//!   with an exact Gamma-order oracle.
//! * [`mult`]: resonance multiplicity, scattering-pole multiplicity, the
//!   correction term and the identity check.
//! * [`jobs`]: JSON job configuration, orchestration and reports used by the
//!   `scatpole` binary.

pub mod error;
pub mod hypmodel;
pub mod jobs;
pub mod mult;
pub mod numerics;
pub mod point;
pub mod selftest;
pub mod smith;
pub mod synth;

pub use error::{Error, Result};
pub use numerics::{CMat, ContourSpec, FamilyHandle, LaurentData, C64};
pub use point::Point;
pub use smith::SmithExponents;
