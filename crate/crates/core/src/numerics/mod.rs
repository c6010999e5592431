//! Complex-plane numerical kernel.

mod contour;
mod family;
mod gamma;
mod rank;
mod winding;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub(crate) use contour::expand_from_samples;
pub use contour::{
    laurent_coefficient, laurent_expand, ContourSamples, ContourSpec, LaurentData,
    DEFAULT_MAGNITUDE_CAP, DEFAULT_NODES, DEFAULT_POLE_TOL,
};
pub use family::FamilyHandle;
pub use gamma::{gamma, is_gamma_pole, log_gamma};
pub use rank::{
    numerical_rank, rank_from_singular_values, rank_info, total_polar_rank, RankInfo,
    ABSOLUTE_RANK_FLOOR, DEFAULT_RANK_TOL,
};
pub use winding::{
    determinant_polar, winding_number_by, winding_number_det, winding_number_det_with,
    winding_number_scalar, PolarValue, WindingOptions,
};

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;

/// Contour and tolerance settings shared by the model and multiplicity
/// pipelines.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NumericsConfig {
    pub radius: f64,
    pub nodes: usize,
    pub tol: f64,
    pub magnitude_cap: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            radius: 0.3,
            nodes: DEFAULT_NODES,
            tol: DEFAULT_RANK_TOL,
            magnitude_cap: DEFAULT_MAGNITUDE_CAP,
        }
    }
}

impl NumericsConfig {
    pub fn contour(&self, center: Complex64) -> crate::Result<ContourSpec> {
        ContourSpec::with_nodes(center, self.radius, self.nodes)?
            .with_magnitude_cap(self.magnitude_cap)
    }
}
