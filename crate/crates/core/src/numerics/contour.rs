//! Trapezoidal quadrature on circles and local Laurent expansions.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CMat, FamilyHandle};
use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 256;
pub const DEFAULT_MAGNITUDE_CAP: f64 = 1e12;
pub const DEFAULT_POLE_TOL: f64 = 1e-8;

/// A circle `|λ − center| = radius` sampled at `nodes` equispaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub center: Complex64,
    pub radius: f64,
    pub nodes: usize,
    /// Node evaluations with an entry above this magnitude are treated as
    /// hitting a singularity.
    pub magnitude_cap: f64,
}

impl ContourSpec {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        Self::with_nodes(center, radius, DEFAULT_NODES)
    }

    pub fn with_nodes(center: Complex64, radius: f64, nodes: usize) -> Result<Self> {
        let spec = ContourSpec {
            center,
            radius,
            nodes,
            magnitude_cap: DEFAULT_MAGNITUDE_CAP,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_magnitude_cap(mut self, cap: f64) -> Result<Self> {
        self.magnitude_cap = cap;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "contour radius must be positive, got {}",
                self.radius
            )));
        }
        if self.nodes < 16 || !self.nodes.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "contour node count must be even and at least 16, got {}",
                self.nodes
            )));
        }
        if self.magnitude_cap.is_nan() || self.magnitude_cap <= 0.0 {
            return Err(Error::InvalidInput("magnitude cap must be positive".into()));
        }
        if !(self.center.re.is_finite() && self.center.im.is_finite()) {
            return Err(Error::InvalidInput("contour center must be finite".into()));
        }
        Ok(())
    }

    /// `e^{2πi k/N}` with the index reduced mod `N` before the division.
    pub(crate) fn unit_root(&self, k: i64) -> Complex64 {
        let n = self.nodes as i64;
        let r = k.rem_euclid(n) as f64;
        Complex64::from_polar(1.0, 2.0 * PI * r / self.nodes as f64)
    }

    pub fn node(&self, k: usize) -> Complex64 {
        self.center + self.unit_root(k as i64) * self.radius
    }

    pub fn doubled(&self) -> Self {
        ContourSpec {
            nodes: self.nodes * 2,
            ..*self
        }
    }
}

/// Node evaluations of a family on a contour.
pub struct ContourSamples {
    contour: ContourSpec,
    values: Vec<CMat>,
}

impl ContourSamples {
    /// Evaluate `family` at every node, rejecting non-finite or oversized
    /// values.
    pub fn collect(family: &FamilyHandle, contour: &ContourSpec) -> Result<Self> {
        contour.validate()?;
        let mut values = Vec::with_capacity(contour.nodes);
        for k in 0..contour.nodes {
            let lambda = contour.node(k);
            let m = family.evaluate(lambda);
            check_node(&m, k, lambda, contour.magnitude_cap)?;
            values.push(m);
        }
        Ok(ContourSamples {
            contour: *contour,
            values,
        })
    }

    pub fn contour(&self) -> &ContourSpec {
        &self.contour
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, |m| m.nrows())
    }

    /// Coefficient of `((λ − c)/r)^j`, i.e. `A_j r^j`.
    pub fn scaled_coefficient(&self, j: i64) -> CMat {
        let dim = self.dim();
        let mut acc: CMat = DMatrix::zeros(dim, dim);
        for (k, value) in self.values.iter().enumerate() {
            let w = self.contour.unit_root(-j * k as i64);
            acc.zip_apply(value, |a, v| *a += v * w);
        }
        acc.unscale(self.contour.nodes as f64)
    }

    /// Laurent coefficient `A_j = (1/2πi) ∮ F(λ) (λ − c)^{−j−1} dλ`.
    pub fn coefficient(&self, j: i64) -> CMat {
        self.scaled_coefficient(j)
            .scale(self.contour.radius.powi(-j as i32))
    }
}

fn check_node(m: &CMat, node: usize, lambda: Complex64, cap: f64) -> Result<()> {
    for z in m.iter() {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::SingularityOnContour {
                node,
                lambda,
                detail: "a non-finite entry".into(),
            });
        }
        if z.norm() > cap {
            return Err(Error::SingularityOnContour {
                node,
                lambda,
                detail: format!(
                    "an entry of magnitude {:e} above the cap {:e}",
                    z.norm(),
                    cap
                ),
            });
        }
    }
    Ok(())
}

/// `(1/2πi) ∮ F(λ) (λ − center)^{−j−1} dλ` by the trapezoidal rule.
pub fn laurent_coefficient(family: &FamilyHandle, contour: &ContourSpec, j: i64) -> Result<CMat> {
    Ok(ContourSamples::collect(family, contour)?.coefficient(j))
}

/// Local Laurent data `F(λ) = Σ_{j ≥ −p} A_j (λ − λ₀)^j` at a contour center.
#[derive(Debug, Clone)]
pub struct LaurentData {
    pub center: Complex64,
    pub radius: f64,
    pub pole_order: usize,
    /// `A_j` for `j = −pole_order ..= taylor_order`.
    pub coeffs: BTreeMap<i64, CMat>,
    /// Largest norm among discarded polar coefficients and the first
    /// coefficient beyond `taylor_order`.
    pub tail_bound: f64,
}

impl LaurentData {
    pub fn coeff(&self, j: i64) -> Option<&CMat> {
        self.coeffs.get(&j)
    }

    /// `A_j r^j`, the coefficient in the contour-normalized variable.
    pub fn scaled_coeff(&self, j: i64) -> Option<CMat> {
        self.coeffs
            .get(&j)
            .map(|a| a.scale(self.radius.powi(j as i32)))
    }

    pub fn residue(&self) -> Option<&CMat> {
        self.coeff(-1)
    }

    pub fn taylor_order(&self) -> i64 {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    /// Polar coefficients `A_{−1}, …, A_{−p}` in that order.
    pub fn polar_part(&self) -> Vec<&CMat> {
        (1..=self.pole_order as i64)
            .filter_map(|i| self.coeff(-i))
            .collect()
    }
}

/// Pole order detected from samples: the largest `q ≤ p_max` with
/// `‖A_{−q}‖ > tol·max(1, ‖A₀‖)`. Any coefficient at or beyond `−p_max`
/// above that threshold is an error.
pub(crate) fn detect_pole_order(
    samples: &ContourSamples,
    p_max: usize,
    tol: f64,
) -> Result<(usize, f64)> {
    let threshold = tol * samples.coefficient(0).norm().max(1.0);
    // A pole deeper than the bound can leave A_{−p_max} itself at zero (a
    // scalar multiple of (λ − λ₀)^{−p_max−1}), so scan a band beyond it.
    let deepest = (2 * p_max).min(samples.contour().nodes / 4).max(p_max);
    let top = (p_max..=deepest)
        .map(|q| samples.coefficient(-(q as i64)).norm())
        .fold(0.0_f64, f64::max);
    if p_max > 0 && top > threshold {
        return Err(Error::PoleOrderExceedsBound {
            p_max,
            norm: top,
            threshold,
        });
    }
    let order = (1..=p_max)
        .rev()
        .find(|&q| samples.coefficient(-(q as i64)).norm() > threshold)
        .unwrap_or(0);
    Ok((order, threshold))
}

pub(crate) fn expand_from_samples(
    samples: &ContourSamples,
    p_max: usize,
    taylor_order: i64,
    tol: f64,
) -> Result<LaurentData> {
    let (pole_order, _) = detect_pole_order(samples, p_max, tol)?;
    let lowest = -(pole_order as i64);
    let coeffs: BTreeMap<i64, CMat> = (lowest..=taylor_order.max(lowest))
        .map(|j| (j, samples.coefficient(j)))
        .collect();
    let discarded = ((pole_order + 1)..=p_max)
        .map(|q| samples.coefficient(-(q as i64)).norm())
        .fold(0.0_f64, f64::max);
    let next = samples.coefficient(taylor_order.max(lowest) + 1).norm();
    Ok(LaurentData {
        center: samples.contour().center,
        radius: samples.contour().radius,
        pole_order,
        coeffs,
        tail_bound: discarded.max(next),
    })
}

/// Laurent expansion `A_{−p} … A_J` with automatic pole-order detection.
pub fn laurent_expand(
    family: &FamilyHandle,
    contour: &ContourSpec,
    p_max: usize,
    taylor_order: i64,
    tol: f64,
) -> Result<LaurentData> {
    let samples = ContourSamples::collect(family, contour)?;
    expand_from_samples(&samples, p_max, taylor_order, tol)
}
