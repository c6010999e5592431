//! Resonance and scattering-pole multiplicities and the identity relating
//! them:
//!
//! ```text
//! m(λ₀) = m(n − λ₀) + ν(λ₀) − 1_{n/2−ℕ}(λ₀) · dim ker Res_{n−λ₀} S(λ)
//! ```

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypmodel::{residue_kernel_dim_model, truncated_family, ModelOperator, ModelParams};
use crate::numerics::{
    laurent_coefficient, numerical_rank, winding_number_det, ContourSpec, FamilyHandle,
    NumericsConfig,
};
use crate::point::Point;
use crate::smith::{null_multiplicity, SmithOptions};
use crate::synth::ResonanceSpec;

/// `z(λ) = λ(n − λ)` and `z′(λ) = n − 2λ`.
pub fn z_map(lambda: Complex64, n: u32) -> (Complex64, Complex64) {
    let n = n as f64;
    (lambda * (n - lambda), n - lambda * 2.0)
}

/// `m(λ₀) = rank Res_{λ₀} ((n − 2λ) R(λ))`.
pub fn resonance_multiplicity(
    resolvent: &FamilyHandle,
    contour: &ContourSpec,
    n: u32,
    tol: f64,
) -> Result<usize> {
    let weighted = resolvent.scaled(format!("(n−2λ)·{}", resolvent.label()), move |lambda| {
        z_map(lambda, n).1
    });
    let residue = laurent_coefficient(&weighted, contour, -1)?;
    Ok(numerical_rank(&residue, tol))
}

/// Local inverse of `z` near `λ₀`: `λ(z) = n/2 + s·√((n²/4 − z)/s²)` with
/// `s = λ₀ − n/2`, so that `λ(z(λ₀)) = λ₀`.
pub fn z_local_inverse(z: Complex64, lambda0: Complex64, n: u32) -> Complex64 {
    let half = n as f64 / 2.0;
    let s = lambda0 - half;
    half + s * ((half * half - z) / (s * s)).sqrt()
}

/// Resonance multiplicity computed in the `z` variable: the rank of the
/// residue at `z₀ = z(λ₀)` of `z ↦ R(λ(z))`.
///
/// `z_radius` must stay below `|λ₀ − n/2|²` so that the local inverse is
/// analytic on the contour.
pub fn resonance_multiplicity_in_z(
    resolvent: &FamilyHandle,
    lambda0: Complex64,
    n: u32,
    z_radius: f64,
    nodes: usize,
    tol: f64,
) -> Result<usize> {
    let s = lambda0 - n as f64 / 2.0;
    if z_radius >= s.norm_sqr() {
        return Err(Error::InvalidInput(format!(
            "z-contour radius {z_radius} must be below |λ₀ − n/2|² = {}",
            s.norm_sqr()
        )));
    }
    let (z0, _) = z_map(lambda0, n);
    let in_z = resolvent.reparametrized(format!("{}∘λ(z)", resolvent.label()), move |z| {
        z_local_inverse(z, lambda0, n)
    });
    let contour = ContourSpec::with_nodes(z0, z_radius, nodes)?;
    let residue = laurent_coefficient(&in_z, &contour, -1)?;
    Ok(numerical_rank(&residue, tol))
}

/// `ν(λ₀) = −Tr Res (S̃′ S̃⁻¹)`, which is minus the winding of `det S̃`.
pub fn scattering_pole_multiplicity(
    renormalized: &FamilyHandle,
    contour: &ContourSpec,
) -> Result<i64> {
    Ok(-winding_number_det(renormalized, contour)?)
}

/// `ν(λ₀)` for the model, channel by channel when the truncation is large.
pub fn model_scattering_pole_multiplicity(
    params: ModelParams,
    contour: &ContourSpec,
) -> Result<i64> {
    Ok(-truncated_family(params, ModelOperator::Renormalized).winding(contour)?)
}

/// `1_{n/2−ℕ}(λ₀) · dim ker Res_{n−λ₀} S(λ)` on the model truncation.
pub fn correction_term(
    params: ModelParams,
    lambda0: &Point,
    numerics: &NumericsConfig,
) -> Result<usize> {
    match lambda0.grid_offset(params.n) {
        None => Ok(0),
        Some(k) => residue_kernel_dim_model(params.n, k, params.truncation, numerics),
    }
}

/// Result of comparing both sides of the multiplicity identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub m_res: i64,
    pub m_reflected: i64,
    pub nu: i64,
    pub correction: i64,
    pub indicator: bool,
    pub identity_ok: bool,
}

/// `m(λ₀) == m(n − λ₀) + ν(λ₀) − correction`; a nonzero correction off the
/// grid is a contract violation.
pub fn check_identity(
    m_res: i64,
    m_reflected: i64,
    nu: i64,
    correction: i64,
    indicator: bool,
) -> Result<IdentityCheck> {
    if !indicator && correction != 0 {
        return Err(Error::ContractViolation(format!(
            "correction {correction} supplied for a point off the grid"
        )));
    }
    Ok(IdentityCheck {
        m_res,
        m_reflected,
        nu,
        correction,
        indicator,
        identity_ok: m_res == m_reflected + nu - correction,
    })
}

/// Numerical settings behind a report.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub radius: f64,
    pub nodes: usize,
    pub tol: f64,
    pub magnitude_cap: f64,
    pub truncation: u32,
    pub warnings: Vec<String>,
}

/// Everything computed at one point.
#[derive(Debug, Clone, Serialize)]
pub struct MultiplicityReport {
    pub lambda0: Point,
    pub n: u32,
    pub m_res: i64,
    pub m_reflected: i64,
    pub nu: i64,
    pub correction: i64,
    pub indicator: bool,
    pub identity_ok: bool,
    pub diagnostics: Diagnostics,
}

/// Both sides of the identity on the `ℍⁿ⁺¹` model at `λ₀`.
///
/// For even `n` the model resolvent has no poles, so it enters as the zero
/// family and `m(λ₀) = m(n − λ₀) = 0`; `ν` and the correction come from the
/// truncated scattering families.
pub fn verify_model_point(
    params: ModelParams,
    lambda0: &Point,
    numerics: &NumericsConfig,
) -> Result<MultiplicityReport> {
    let n = params.n;
    let center = lambda0.to_c64();
    let resolvent = FamilyHandle::zero(1, "free resolvent of ℍⁿ⁺¹ (n even)");
    let m_res =
        resonance_multiplicity(&resolvent, &numerics.contour(center)?, n, numerics.tol)? as i64;
    let m_reflected = resonance_multiplicity(
        &resolvent,
        &numerics.contour(lambda0.reflected(n).to_c64())?,
        n,
        numerics.tol,
    )? as i64;
    let nu = model_scattering_pole_multiplicity(params, &numerics.contour(center)?)?;
    let indicator = lambda0.grid_offset(n).is_some();
    let correction = correction_term(params, lambda0, numerics)? as i64;
    let check = check_identity(m_res, m_reflected, nu, correction, indicator)?;
    Ok(MultiplicityReport {
        lambda0: *lambda0,
        n,
        m_res,
        m_reflected,
        nu,
        correction,
        indicator,
        identity_ok: check.identity_ok,
        diagnostics: Diagnostics {
            radius: numerics.radius,
            nodes: numerics.nodes,
            tol: numerics.tol,
            magnitude_cap: numerics.magnitude_cap,
            truncation: params.truncation,
            warnings: Vec::new(),
        },
    })
}

/// At a grid point `n/2 − k`, the model `S̃` has null multiplicity 0 and
/// every Smith exponent in `{−1, 0}`.
pub fn reflected_smith_check(
    params: ModelParams,
    lambda0: &Point,
    numerics: &NumericsConfig,
) -> Result<bool> {
    if lambda0.grid_offset(params.n).is_none() {
        return Err(Error::InvalidInput(format!(
            "{lambda0} is not a grid point n/2 − k for n = {}",
            params.n
        )));
    }
    let family = truncated_family(params, ModelOperator::Renormalized);
    let opts = SmithOptions {
        tol: numerics.tol,
        ..SmithOptions::default()
    };
    let s = family.exponents(&numerics.contour(lambda0.to_c64())?, opts)?;
    Ok(null_multiplicity(&s) == 0 && s.exponents.iter().all(|&k| k == -1 || k == 0))
}

/// Refuse synthetic eigenvalues whose resonance `λ₀` or reflection `n − λ₀`
/// lands on `n/2 − ℕ`.
pub fn ensure_eigenvalue_off_grid(spec: &ResonanceSpec) -> Result<()> {
    let p = Point::Approx(spec.center);
    for q in [p, p.reflected(spec.n)] {
        if q.grid_offset(spec.n).is_some() {
            return Err(Error::EigenvalueAtGridPoint(q.to_string()));
        }
    }
    Ok(())
}
