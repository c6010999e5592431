//! Winding numbers by continuous argument tracking.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::{CMat, ContourSpec, FamilyHandle};
use crate::error::{Error, Result};

/// Knobs for determinant phase tracking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingOptions {
    /// Natural log of the determinant floor.
    pub log_det_floor: f64,
    /// How many times the node count may be doubled.
    pub max_doublings: u32,
}

impl Default for WindingOptions {
    fn default() -> Self {
        WindingOptions {
            log_det_floor: -500.0,
            max_doublings: 6,
        }
    }
}

/// Unit phase and `ln|·|` of a nonzero complex quantity.
#[derive(Debug, Clone, Copy)]
pub struct PolarValue {
    pub phase: Complex64,
    pub log_abs: f64,
}

impl PolarValue {
    pub fn of(z: Complex64) -> Self {
        let r = z.norm();
        PolarValue {
            phase: if r > 0.0 {
                z / r
            } else {
                Complex64::new(0.0, 0.0)
            },
            log_abs: if r > 0.0 { r.ln() } else { f64::NEG_INFINITY },
        }
    }

    pub fn is_finite(&self) -> bool {
        self.log_abs.is_finite() && self.phase.re.is_finite() && self.phase.im.is_finite()
    }
}

/// Determinant of a square matrix in polar form, from the LU diagonal.
///
/// Multiplying unit phases instead of the raw pivots keeps large
/// block-diagonal determinants from overflowing.
pub fn determinant_polar(m: &CMat) -> PolarValue {
    let n = m.nrows();
    if n == 0 {
        return PolarValue::of(Complex64::new(1.0, 0.0));
    }
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return PolarValue {
            phase: Complex64::new(f64::NAN, f64::NAN),
            log_abs: f64::NAN,
        };
    }
    let lu = m.clone().lu();
    let mut phase = Complex64::new(lu.p().determinant::<f64>(), 0.0);
    let mut log_abs = 0.0;
    let u = lu.u();
    for i in 0..n {
        let pv = PolarValue::of(u[(i, i)]);
        phase *= pv.phase;
        log_abs += pv.log_abs;
    }
    // renormalize the accumulated phase
    let r = phase.norm();
    if r > 0.0 {
        phase /= r;
    }
    PolarValue { phase, log_abs }
}

/// Winding number of `node ↦ value(λ_k)` around the contour.
///
/// The evaluator is called on the nodes of `contour`; whenever a phase step
/// reaches `π/2` the node count is doubled and the computation restarts.
pub fn winding_number_by<F>(contour: &ContourSpec, opts: WindingOptions, value: F) -> Result<i64>
where
    F: Fn(Complex64) -> PolarValue,
{
    contour.validate()?;
    let mut current = *contour;
    for _ in 0..=opts.max_doublings {
        match track_phase(&current, opts, &value)? {
            Some(w) => return Ok(w),
            None => current = current.doubled(),
        }
    }
    Err(Error::Resolution {
        nodes: current.nodes,
    })
}

fn track_phase<F>(contour: &ContourSpec, opts: WindingOptions, value: &F) -> Result<Option<i64>>
where
    F: Fn(Complex64) -> PolarValue,
{
    let mut phases = Vec::with_capacity(contour.nodes);
    for k in 0..contour.nodes {
        let pv = value(contour.node(k));
        if !pv.is_finite() || pv.log_abs < opts.log_det_floor {
            if pv.log_abs.is_nan() || pv.log_abs == f64::INFINITY {
                return Err(Error::SingularityOnContour {
                    node: k,
                    lambda: contour.node(k),
                    detail: "a non-finite determinant".into(),
                });
            }
            return Err(Error::DeterminantVanishes {
                node: k,
                log_abs_det: pv.log_abs,
            });
        }
        phases.push(pv.phase);
    }
    let mut total = 0.0;
    for k in 0..contour.nodes {
        let next = phases[(k + 1) % contour.nodes];
        let step = (next * phases[k].conj()).arg();
        if step.abs() >= FRAC_PI_2 {
            return Ok(None);
        }
        total += step;
    }
    Ok(Some((total / (2.0 * PI)).round() as i64))
}

/// Winding number of `det F(λ)` as `λ` runs once counterclockwise around the
/// contour.
pub fn winding_number_det(family: &FamilyHandle, contour: &ContourSpec) -> Result<i64> {
    winding_number_det_with(family, contour, WindingOptions::default())
}

pub fn winding_number_det_with(
    family: &FamilyHandle,
    contour: &ContourSpec,
    opts: WindingOptions,
) -> Result<i64> {
    let cap = contour.magnitude_cap;
    winding_number_by(contour, opts, |lambda| {
        let m = family.evaluate(lambda);
        if m.iter().any(|z| z.norm() > cap) {
            return PolarValue {
                phase: Complex64::new(f64::NAN, f64::NAN),
                log_abs: f64::NAN,
            };
        }
        determinant_polar(&m)
    })
}

/// Winding number of a scalar function around the contour.
pub fn winding_number_scalar<F>(contour: &ContourSpec, f: F) -> Result<i64>
where
    F: Fn(Complex64) -> Complex64,
{
    winding_number_by(contour, WindingOptions::default(), |lambda| {
        PolarValue::of(f(lambda))
    })
}
