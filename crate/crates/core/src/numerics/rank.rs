use nalgebra::DMatrix;

use super::{CMat, LaurentData};
use crate::error::{Error, Result};

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Below this largest singular value a matrix is treated as zero.
pub const ABSOLUTE_RANK_FLOOR: f64 = 1e-14;

/// Rank decision together with its margin.
#[derive(Debug, Clone, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    pub sigma_max: f64,
    pub threshold: f64,
    /// A singular value lies within a factor 10 of the threshold.
    pub ambiguous: bool,
}

/// Rank decision from a list of singular values (any order).
pub fn rank_from_singular_values(sigmas: &[f64], tol: f64) -> RankInfo {
    let sigma_max = sigmas.iter().copied().fold(0.0_f64, f64::max);
    if sigma_max <= ABSOLUTE_RANK_FLOOR {
        return RankInfo {
            rank: 0,
            sigma_max,
            threshold: ABSOLUTE_RANK_FLOOR,
            ambiguous: false,
        };
    }
    let threshold = tol * sigma_max;
    let rank = sigmas.iter().filter(|&&s| s > threshold).count();
    let ambiguous = sigmas
        .iter()
        .any(|&s| s > threshold / 10.0 && s < threshold * 10.0);
    RankInfo {
        rank,
        sigma_max,
        threshold,
        ambiguous,
    }
}

pub fn rank_info(a: &CMat, tol: f64) -> RankInfo {
    if a.is_empty() {
        return rank_from_singular_values(&[], tol);
    }
    let sigmas = a.clone().singular_values();
    rank_from_singular_values(sigmas.as_slice(), tol)
}

/// Number of singular values above `tol·σ_max`; zero when `σ_max ≤ 1e−14`.
pub fn numerical_rank(a: &CMat, tol: f64) -> usize {
    rank_info(a, tol).rank
}

/// `dim Σ Im(A_{−i})`, the rank of `[A_{−1} | … | A_{−p}]`.
pub fn total_polar_rank(data: &LaurentData, tol: f64) -> Result<usize> {
    if data.pole_order == 0 {
        return Err(Error::Domain(
            "total polar rank requires a pole (pole order 0)".into(),
        ));
    }
    let polar = data.polar_part();
    let rows = polar[0].nrows();
    let cols: usize = polar.iter().map(|a| a.ncols()).sum();
    let mut block: CMat = DMatrix::zeros(rows, cols);
    let mut offset = 0;
    for a in polar {
        block.view_mut((0, offset), (rows, a.ncols())).copy_from(a);
        offset += a.ncols();
    }
    Ok(numerical_rank(&block, tol))
}
