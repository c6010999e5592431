//! Scattering model of real hyperbolic space `ℍⁿ⁺¹` with `n` even.
//!
//! The scattering operator acts on degree-`l` spherical harmonics of `Sⁿ` by
//!
//! ```text
//! s(λ, l) = 2^{n−2λ} Γ(n/2 − λ)/Γ(λ − n/2) · Γ(λ + l)/Γ(n − λ + l)
//! ```
//!
//! and the renormalized operator by
//! `s̃(λ, l) = c(n − λ) · (1 + l(l + n − 1))^{n/2 − λ} · s(λ, l)` with
//! `c(λ) = 2^{n−2λ} Γ(n/2 − λ)/Γ(λ − n/2)`. Each channel has multiplicity
//! `dim H_l`, so a truncation at degree `L` is a block-diagonal family.
//!
//! [`gamma_order`] counts pole and zero orders of every Gamma factor exactly
//! on rational points; it is the reference against which the contour
//! numerics are checked.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    log_gamma, rank_from_singular_values, winding_number_det, winding_number_scalar, CMat,
    ContourSamples, ContourSpec, FamilyHandle, NumericsConfig,
};
use crate::point::Point;
use crate::smith::{meromorphic_exponents, SmithExponents, SmithOptions};

/// Families above this dimension are handled channel by channel instead of
/// being inflated into an explicit matrix.
pub const INFLATION_LIMIT: usize = 200;

/// Boundary dimension `n` (even) and truncation degree `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: u32,
    pub truncation: u32,
}

impl ModelParams {
    pub fn new(n: u32, truncation: u32) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "model requires even n ≥ 2, got {n}"
            )));
        }
        if n > 64 || truncation > 4096 {
            return Err(Error::InvalidInput(format!(
                "model parameters out of range: n = {n}, L = {truncation}"
            )));
        }
        Ok(ModelParams { n, truncation })
    }

    pub fn channels(&self) -> Vec<HarmonicChannel> {
        (0..=self.truncation)
            .map(|l| HarmonicChannel::new(self.n, l))
            .collect()
    }

    pub fn dimension(&self) -> u64 {
        self.channels().iter().map(|c| c.dim).sum()
    }
}

/// Spherical-harmonic degree `l` on `Sⁿ` and its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HarmonicChannel {
    pub l: u32,
    pub dim: u64,
}

impl HarmonicChannel {
    pub fn new(n: u32, l: u32) -> Self {
        HarmonicChannel {
            l,
            dim: harmonic_dimension(n, l),
        }
    }

    /// Laplacian eigenvalue `l(l + n − 1)` on the channel.
    pub fn laplace_eigenvalue(&self, n: u32) -> f64 {
        let l = self.l as f64;
        l * (l + n as f64 - 1.0)
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `dim H_l = C(n + l, l) − C(n + l − 2, l − 2)` (and 1 for `l = 0`).
pub fn harmonic_dimension(n: u32, l: u32) -> u64 {
    let (n, l) = (n as u64, l as u64);
    let top = binomial(n + l, l);
    let low = if l >= 2 {
        binomial(n + l - 2, l - 2)
    } else {
        0
    };
    (top - low) as u64
}

/// Which model operator a family realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelOperator {
    /// `S(λ)`
    Scattering,
    /// `S̃(λ)`
    Renormalized,
    /// `S̃(n − λ)`
    ReflectedRenormalized,
}

fn checked_log_gamma(arg: Complex64, factor: &str) -> Result<Complex64> {
    log_gamma(arg).map_err(|_| Error::Domain(format!("Gamma pole of {factor} at argument {arg}")))
}

/// `ln c(λ) = (n − 2λ) ln 2 + ln Γ(n/2 − λ) − ln Γ(λ − n/2)`.
fn log_c_factor(lambda: Complex64, n: u32) -> Result<Complex64> {
    let half = n as f64 / 2.0;
    let num = checked_log_gamma(half - lambda, "Γ(n/2 − λ) in c(λ)")?;
    let den = checked_log_gamma(lambda - half, "Γ(λ − n/2) in c(λ)")?;
    Ok((n as f64 - lambda * 2.0) * std::f64::consts::LN_2 + num - den)
}

fn log_sphere_s(lambda: Complex64, n: u32, l: u32) -> Result<Complex64> {
    let l = l as f64;
    let num = checked_log_gamma(lambda + l, "Γ(λ + l) in s(λ, l)")?;
    let den = checked_log_gamma(n as f64 - lambda + l, "Γ(n − λ + l) in s(λ, l)")?;
    Ok(log_c_factor(lambda, n)? + num - den)
}

fn log_renormalized(lambda: Complex64, n: u32, l: u32) -> Result<Complex64> {
    let lambda_sq = 1.0 + HarmonicChannel::new(n, l).laplace_eigenvalue(n);
    let power = (n as f64 / 2.0 - lambda) * lambda_sq.ln();
    Ok(log_c_factor(n as f64 - lambda, n)? + power + log_sphere_s(lambda, n, l)?)
}

/// `c(λ) = 2^{n−2λ} Γ(n/2 − λ)/Γ(λ − n/2)`.
pub fn c_factor(lambda: Complex64, n: u32) -> Result<Complex64> {
    log_c_factor(lambda, n).map(Complex64::exp)
}

/// Eigenvalue `s(λ, l)` of `S(λ)` on degree-`l` harmonics.
pub fn sphere_s_eigen(lambda: Complex64, n: u32, l: u32) -> Result<Complex64> {
    log_sphere_s(lambda, n, l).map(Complex64::exp)
}

/// Eigenvalue `s̃(λ, l)` of `S̃(λ)` on degree-`l` harmonics.
pub fn renormalized_eigen(lambda: Complex64, n: u32, l: u32) -> Result<Complex64> {
    log_renormalized(lambda, n, l).map(Complex64::exp)
}

/// Channel eigenvalue of the chosen operator.
pub fn model_eigen(op: ModelOperator, lambda: Complex64, n: u32, l: u32) -> Result<Complex64> {
    match op {
        ModelOperator::Scattering => sphere_s_eigen(lambda, n, l),
        ModelOperator::Renormalized => renormalized_eigen(lambda, n, l),
        ModelOperator::ReflectedRenormalized => renormalized_eigen(n as f64 - lambda, n, l),
    }
}

/// Gamma argument `sign·λ + offset`.
#[derive(Debug, Clone, Copy)]
struct GammaArg {
    sign: i64,
    offset: Rational64,
}

impl GammaArg {
    fn at(&self, lambda: Rational64) -> Rational64 {
        lambda * self.sign + self.offset
    }
}

/// Order of `Γ` at `w`: −1 on nonpositive integers, else 0.
fn gamma_pole_order(w: Rational64) -> i64 {
    if w.is_integer() && !w.is_positive() {
        -1
    } else {
        0
    }
}

fn gamma_factors(op: ModelOperator, n: u32, l: u32) -> (Vec<GammaArg>, Vec<GammaArg>) {
    let half = Rational64::new(n as i64, 2);
    let nn = Rational64::from_integer(n as i64);
    let ll = Rational64::from_integer(l as i64);
    let arg = |sign, offset| GammaArg { sign, offset };
    // s(λ, l)
    let mut num = vec![arg(-1, half), arg(1, ll)];
    let mut den = vec![arg(1, -half), arg(-1, nn + ll)];
    if op != ModelOperator::Scattering {
        // c(n − λ) = 2^{2λ−n} Γ(λ − n/2)/Γ(n/2 − λ)
        num.push(arg(1, -half));
        den.push(arg(-1, half));
    }
    (num, den)
}

/// Exact order of vanishing (negative for poles) of the channel eigenvalue of
/// `op` at `λ₀`, counted factor by factor from the Gamma functions.
///
/// Points that are not half-integers carry no Gamma locus and give 0.
pub fn gamma_order(op: ModelOperator, lambda0: &Point, n: u32, l: u32) -> i64 {
    let point = match op {
        ModelOperator::ReflectedRenormalized => lambda0.reflected(n),
        _ => *lambda0,
    };
    let Some(at) = point.as_half_integer() else {
        return 0;
    };
    let (num, den) = gamma_factors(op, n, l);
    let num_order: i64 = num.iter().map(|g| gamma_pole_order(g.at(at))).sum();
    let den_order: i64 = den.iter().map(|g| gamma_pole_order(g.at(at))).sum();
    num_order - den_order
}

/// Order of `s̃(·, l)` at `λ₀`.
pub fn channel_order_oracle(lambda0: &Point, n: u32, l: u32) -> i64 {
    gamma_order(ModelOperator::Renormalized, lambda0, n, l)
}

/// `ν(λ₀)` on the degree-`L` truncation from channel orders alone:
/// `−Σ_l dim H_l · ord_{λ₀} s̃(·, l)`.
pub fn nu_oracle(lambda0: &Point, n: u32, truncation: u32) -> i64 {
    (0..=truncation)
        .map(|l| -(harmonic_dimension(n, l) as i64) * channel_order_oracle(lambda0, n, l))
        .sum()
}

/// Truncated block-diagonal model family.
#[derive(Debug, Clone)]
pub struct ModelFamily {
    pub params: ModelParams,
    pub op: ModelOperator,
    pub channels: Vec<HarmonicChannel>,
}

/// Block-diagonal truncation `⊕_{l ≤ L} eigen(λ, l)·I_{dim H_l}`.
pub fn truncated_family(params: ModelParams, op: ModelOperator) -> ModelFamily {
    ModelFamily {
        params,
        op,
        channels: params.channels(),
    }
}

impl ModelFamily {
    pub fn dim(&self) -> usize {
        self.channels.iter().map(|c| c.dim as usize).sum()
    }

    pub fn label(&self) -> String {
        format!(
            "{:?}(n={}, L={})",
            self.op, self.params.n, self.params.truncation
        )
    }

    pub fn eigenvalue(&self, l: u32, lambda: Complex64) -> Result<Complex64> {
        model_eigen(self.op, lambda, self.params.n, l)
    }

    /// Product of channel eigenvalues with multiplicity.
    pub fn determinant(&self, lambda: Complex64) -> Result<Complex64> {
        self.channels
            .iter()
            .try_fold(Complex64::new(1.0, 0.0), |acc, c| {
                Ok(acc * self.eigenvalue(c.l, lambda)?.powi(c.dim as i32))
            })
    }

    /// 1×1 family of one channel. Gamma poles evaluate to NaN so that
    /// contour guards reject them.
    pub fn channel_family(&self, l: u32) -> FamilyHandle {
        let (op, n) = (self.op, self.params.n);
        FamilyHandle::scalar(format!("{:?}(n={n}, l={l})", op), move |lambda| {
            model_eigen(op, lambda, n, l).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        })
    }

    /// Explicit matrix family; refused above [`INFLATION_LIMIT`].
    pub fn to_handle(&self) -> Result<FamilyHandle> {
        let dim = self.dim();
        if dim > INFLATION_LIMIT {
            return Err(Error::InvalidInput(format!(
                "model truncation of dimension {dim} exceeds the inflation limit {INFLATION_LIMIT}"
            )));
        }
        let slots: Vec<u32> = self
            .channels
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.l, c.dim as usize))
            .collect();
        let (op, n) = (self.op, self.params.n);
        Ok(FamilyHandle::new(dim, self.label(), move |lambda| {
            let mut m = CMat::zeros(dim, dim);
            let mut last: Option<(u32, Complex64)> = None;
            for (i, &l) in slots.iter().enumerate() {
                let v = match last {
                    Some((ll, v)) if ll == l => v,
                    _ => {
                        model_eigen(op, lambda, n, l).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
                    }
                };
                last = Some((l, v));
                m[(i, i)] = v;
            }
            m
        }))
    }

    /// Winding of `det` around the contour, channel by channel.
    pub fn channel_winding(&self, contour: &ContourSpec) -> Result<i64> {
        self.channels.iter().try_fold(0i64, |acc, c| {
            let f = self.channel_family(c.l);
            let w = winding_number_scalar(contour, |lambda| f.evaluate(lambda)[(0, 0)])?;
            Ok(acc + w * c.dim as i64)
        })
    }

    /// Winding of `det`; through the explicit matrix when it is small enough.
    pub fn winding(&self, contour: &ContourSpec) -> Result<i64> {
        if self.dim() <= INFLATION_LIMIT {
            winding_number_det(&self.to_handle()?, contour)
        } else {
            self.channel_winding(contour)
        }
    }

    /// Smith exponents at the contour center.
    pub fn exponents(&self, contour: &ContourSpec, opts: SmithOptions) -> Result<SmithExponents> {
        if self.dim() <= INFLATION_LIMIT {
            return meromorphic_exponents(&self.to_handle()?, contour, opts);
        }
        // the Smith form of a block-diagonal family is the union of the blocks'
        let mut exponents = Vec::with_capacity(self.dim());
        let mut warnings = Vec::new();
        for c in &self.channels {
            let s = meromorphic_exponents(&self.channel_family(c.l), contour, opts)?;
            exponents.extend(std::iter::repeat_n(s.exponents[0], c.dim as usize));
            warnings.extend(s.warnings);
        }
        let mut out = SmithExponents::new(contour.center, exponents);
        out.warnings = warnings;
        Ok(out)
    }

    /// `dim ker Res` at the contour center: dimension minus the numerical
    /// rank of the residue.
    pub fn residue_kernel_dimension(&self, contour: &ContourSpec, tol: f64) -> Result<usize> {
        if self.dim() <= INFLATION_LIMIT {
            let residue = ContourSamples::collect(&self.to_handle()?, contour)?.coefficient(-1);
            return Ok(self.dim() - crate::numerics::numerical_rank(&residue, tol));
        }
        let mut sigmas = Vec::with_capacity(self.dim());
        for c in &self.channels {
            let r = ContourSamples::collect(&self.channel_family(c.l), contour)?.coefficient(-1)
                [(0, 0)]
                .norm();
            sigmas.extend(std::iter::repeat_n(r, c.dim as usize));
        }
        Ok(self.dim() - rank_from_singular_values(&sigmas, tol).rank)
    }
}

/// `Σ_{l ≤ min(L, k − n/2)} dim H_l`: channels whose `S`-residue at
/// `n/2 + k` vanishes because `1/Γ(n − λ + l)` has a zero there.
pub fn residue_kernel_dim_analytic(n: u32, k: u32, truncation: u32) -> u64 {
    let half = n / 2;
    if k < half {
        return 0;
    }
    (0..=(k - half).min(truncation))
        .map(|l| harmonic_dimension(n, l))
        .sum()
}

/// Dimension of the kernel of `Res_{n/2+k} S(λ)` on the degree-`L`
/// truncation, computed numerically and analytically; the two must agree.
pub fn residue_kernel_dim_model(
    n: u32,
    k: u32,
    truncation: u32,
    numerics: &NumericsConfig,
) -> Result<usize> {
    if k == 0 || truncation < k {
        return Err(Error::InvalidInput(format!(
            "residue kernel needs k ≥ 1 and L ≥ k, got k = {k}, L = {truncation}"
        )));
    }
    let params = ModelParams::new(n, truncation)?;
    let family = truncated_family(params, ModelOperator::Scattering);
    let center = Complex64::new((n / 2 + k) as f64, 0.0);
    let numeric = family.residue_kernel_dimension(&numerics.contour(center)?, numerics.tol)?;
    let analytic = residue_kernel_dim_analytic(n, k, truncation) as usize;
    if numeric != analytic {
        return Err(Error::Consistency(format!(
            "residue kernel at n/2 + {k} (n = {n}, L = {truncation}): numeric {numeric} vs analytic {analytic}"
        )));
    }
    Ok(numeric)
}

/// The exact grid point `n/2 − k`.
pub fn grid_point(n: u32, k: u32) -> Point {
    Point::Exact(Rational64::new(n as i64 - 2 * k as i64, 2))
}
