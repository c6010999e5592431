//! Seeded families with known factorization data.
//!
//! Everything here is reproducible from a 64-bit seed: the same spec always
//! produces bit-identical families.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{rank_info, CMat, FamilyHandle};

/// Largest condition number accepted for a generated factor at its center.
pub const MAX_FACTOR_CONDITION: f64 = 1e3;

const MAX_RESAMPLES: usize = 1000;

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the box `[−1/√2, 1/√2]²`, so modulus ≤ 1.
fn box_sample(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(
        rng.gen_range(-FRAC_1_SQRT_2..=FRAC_1_SQRT_2),
        rng.gen_range(-FRAC_1_SQRT_2..=FRAC_1_SQRT_2),
    )
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    DMatrix::from_fn(rows, cols, |_, _| box_sample(rng))
}

fn condition_number(m: &CMat) -> f64 {
    let s = m.clone().singular_values();
    let max = s.iter().copied().fold(0.0_f64, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Polynomial matrix `Σ_j C_j (λ − center)^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    pub center: Complex64,
    pub coeffs: Vec<CMat>,
}

impl PolyMatrix {
    pub fn constant(center: Complex64, m: CMat) -> Self {
        PolyMatrix {
            center,
            coeffs: vec![m],
        }
    }

    pub fn rows(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn evaluate(&self, lambda: Complex64) -> CMat {
        let d = lambda - self.center;
        let mut acc = self.coeffs[self.coeffs.len() - 1].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc * d + c;
        }
        acc
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        let rows = self.rows();
        let cols = other.coeffs[0].ncols();
        let mut coeffs = vec![CMat::zeros(rows, cols); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        PolyMatrix {
            center: self.center,
            coeffs,
        }
    }
}

/// Polynomial matrix with constant nonzero determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct Unimodular {
    pub poly: PolyMatrix,
    pub determinant: Complex64,
}

impl Unimodular {
    pub fn evaluate(&self, lambda: Complex64) -> CMat {
        self.poly.evaluate(lambda)
    }

    pub fn dim(&self) -> usize {
        self.poly.rows()
    }

    pub fn family(&self, label: impl Into<String>) -> FamilyHandle {
        let u = self.clone();
        FamilyHandle::new(self.dim(), label, move |l| u.evaluate(l))
    }
}

/// Unit triangular polynomial matrix: a product of transvections
/// `I + p(λ) e_i e_jᵀ`.
fn unit_triangular(
    rng: &mut impl Rng,
    dim: usize,
    degree: usize,
    center: Complex64,
    lower: bool,
) -> PolyMatrix {
    let mut coeffs = vec![CMat::zeros(dim, dim); degree + 1];
    coeffs[0].fill_with_identity();
    for i in 0..dim {
        for j in 0..dim {
            if (lower && i > j) || (!lower && i < j) {
                for c in coeffs.iter_mut() {
                    c[(i, j)] = box_sample(rng);
                }
            }
        }
    }
    PolyMatrix { center, coeffs }
}

fn unimodular_from(
    rng: &mut impl Rng,
    dim: usize,
    degree: usize,
    center: Complex64,
) -> Result<Unimodular> {
    for _ in 0..MAX_RESAMPLES {
        let scales: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::from_polar(rng.gen_range(0.5..=1.0), rng.gen_range(0.0..2.0 * PI)))
            .collect();
        let diag = PolyMatrix::constant(
            center,
            CMat::from_diagonal(&nalgebra::DVector::from_vec(scales.clone())),
        );
        let lower = unit_triangular(rng, dim, degree, center, true);
        let upper = unit_triangular(rng, dim, degree, center, false);
        let poly = diag.mul(&lower).mul(&upper);
        if condition_number(&poly.coeffs[0]) <= MAX_FACTOR_CONDITION {
            return Ok(Unimodular {
                poly,
                determinant: scales.iter().product(),
            });
        }
    }
    Err(Error::Consistency(format!(
        "no unimodular factor with condition ≤ {MAX_FACTOR_CONDITION:e} after {MAX_RESAMPLES} draws"
    )))
}

/// Seeded unimodular polynomial matrix `D·L(λ)·U(λ)`: a constant diagonal
/// scaling times unit lower and upper triangular factors whose off-diagonal
/// entries are polynomials of degree ≤ `degree` in `λ − center`.
pub fn make_unimodular(
    dim: usize,
    degree: usize,
    center: Complex64,
    seed: u64,
) -> Result<Unimodular> {
    if dim == 0 {
        return Err(Error::InvalidInput(
            "unimodular factor needs dim ≥ 1".into(),
        ));
    }
    unimodular_from(&mut rng_for(seed), dim, degree, center)
}

fn default_degree() -> usize {
    3
}

/// Family with prescribed Smith exponents at `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub dim: usize,
    pub center: Complex64,
    pub exponents: Vec<i64>,
    pub seed: u64,
    #[serde(default = "default_degree")]
    pub degree: usize,
}

/// Ranges for drawing random [`SynthSpec`]s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthDraw {
    pub max_dim: usize,
    pub min_exponent: i64,
    pub max_exponent: i64,
    pub degree: usize,
}

impl Default for SynthDraw {
    fn default() -> Self {
        Self {
            max_dim: 6,
            min_exponent: -3,
            max_exponent: 3,
            degree: 3,
        }
    }
}

impl SynthDraw {
    /// Spec drawn deterministically from `seed`: dimension in `1..=max_dim`,
    /// exponents uniform in the range, center in `[−1, 1]²`.
    pub fn spec(&self, seed: u64) -> Result<SynthSpec> {
        if self.max_dim == 0 || self.min_exponent > self.max_exponent {
            return Err(Error::InvalidInput(format!(
                "empty synthetic draw range {self:?}"
            )));
        }
        let mut rng = rng_for(seed ^ 0x5eed_5eed_5eed_5eed);
        let dim = rng.gen_range(1..=self.max_dim);
        let exponents = (0..dim)
            .map(|_| rng.gen_range(self.min_exponent..=self.max_exponent))
            .collect();
        let center = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        Ok(SynthSpec {
            dim,
            center,
            exponents,
            seed,
            degree: self.degree,
        })
    }
}

/// Generated family together with its ground truth.
#[derive(Debug, Clone)]
pub struct SynthFamily {
    pub family: FamilyHandle,
    /// Sorted ground-truth exponents.
    pub exponents: Vec<i64>,
    pub left: Arc<Unimodular>,
    pub right: Arc<Unimodular>,
}

/// `F(λ) = U₁(λ) diag((λ − center)^{k_l}) U₂(λ)`.
pub fn synth_family(spec: &SynthSpec) -> Result<SynthFamily> {
    if spec.dim == 0 || spec.exponents.len() != spec.dim {
        return Err(Error::InvalidInput(format!(
            "synthetic family of dim {} needs exactly that many exponents, got {}",
            spec.dim,
            spec.exponents.len()
        )));
    }
    if spec.exponents.iter().any(|k| k.unsigned_abs() > 64) {
        return Err(Error::InvalidInput(
            "synthetic exponents must lie in [-64, 64]".into(),
        ));
    }
    let mut rng = rng_for(spec.seed);
    let left = Arc::new(unimodular_from(
        &mut rng,
        spec.dim,
        spec.degree,
        spec.center,
    )?);
    let right = Arc::new(unimodular_from(
        &mut rng,
        spec.dim,
        spec.degree,
        spec.center,
    )?);
    let mut exponents = spec.exponents.clone();
    exponents.sort_unstable();

    let (l, r) = (left.clone(), right.clone());
    let ks: Vec<i32> = spec.exponents.iter().map(|&k| k as i32).collect();
    let center = spec.center;
    let label = format!("synth{:?}@{}", spec.exponents, spec.seed);
    let family = FamilyHandle::new(spec.dim, label, move |lambda| {
        let d = lambda - center;
        let mut m = l.evaluate(lambda);
        for (j, &k) in ks.iter().enumerate() {
            let s = d.powi(k);
            m.column_mut(j).iter_mut().for_each(|z| *z *= s);
        }
        m * r.evaluate(lambda)
    });
    Ok(SynthFamily {
        family,
        exponents,
        left,
        right,
    })
}

/// Resolvent-style family parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceSpec {
    pub ambient_dim: usize,
    /// Boundary dimension; `z(λ) = λ(n − λ)`.
    pub n: u32,
    /// `λ_e` for eigen families, `λ₀` for resolvent families.
    pub center: Complex64,
    /// Eigenspace dimension `p` (eigen families).
    #[serde(default)]
    pub rank: usize,
    /// Negative `z`-exponents (resolvent families).
    #[serde(default)]
    pub z_exponents: Vec<i64>,
    pub seed: u64,
}

/// Generated resolvent-style family with its multiplicity.
#[derive(Debug, Clone)]
pub struct ResonanceFamily {
    pub family: FamilyHandle,
    /// Ground-truth rank of `Res (n − 2λ) F` at the center.
    pub multiplicity: usize,
}

fn symmetric_holomorphic_part(rng: &mut impl Rng, dim: usize, center: Complex64) -> PolyMatrix {
    let coeffs = (0..2)
        .map(|_| {
            let a = random_matrix(rng, dim, dim).scale(0.5);
            (&a + a.transpose()).scale(0.5)
        })
        .collect();
    PolyMatrix { center, coeffs }
}

fn orthonormal_real(
    rng: &mut impl Rng,
    dim: usize,
    count: usize,
) -> Result<Vec<nalgebra::DVector<f64>>> {
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(count);
    let mut draws = 0;
    while basis.len() < count {
        draws += 1;
        if draws > MAX_RESAMPLES {
            return Err(Error::Consistency(
                "could not draw independent eigenvectors".into(),
            ));
        }
        let mut v = nalgebra::DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..=1.0));
        for b in &basis {
            let proj = b.dot(&v);
            v -= b * proj;
        }
        let norm = v.norm();
        if norm > 1e-3 {
            basis.push(v / norm);
        }
    }
    Ok(basis)
}

/// `F(λ) = (2λ_e − n)⁻¹ (λ − λ_e)⁻¹ Σ_k φ_k φ_kᵀ + H(λ)` with real orthonormal
/// `φ_k` and a complex-symmetric linear `H`.
pub fn synth_eigen_family(spec: &ResonanceSpec) -> Result<ResonanceFamily> {
    let n = spec.n as f64;
    let lambda_e = spec.center;
    let gap = lambda_e * 2.0 - n;
    if gap.norm() < 1e-12 {
        return Err(Error::Domain("eigen family at λ_e = n/2".into()));
    }
    if spec.rank == 0 || spec.rank > spec.ambient_dim {
        return Err(Error::InvalidInput(format!(
            "eigen family rank {} must be in 1..={}",
            spec.rank, spec.ambient_dim
        )));
    }
    let mut rng = rng_for(spec.seed);
    let phis = orthonormal_real(&mut rng, spec.ambient_dim, spec.rank)?;
    let mut projector = CMat::zeros(spec.ambient_dim, spec.ambient_dim);
    for phi in &phis {
        let phi = phi.map(|x| Complex64::new(x, 0.0));
        projector += &phi * phi.transpose();
    }
    let residue = projector / gap;
    let h = symmetric_holomorphic_part(&mut rng, spec.ambient_dim, lambda_e);
    let label = format!("eigen(p={})@{}", spec.rank, spec.seed);
    let family = FamilyHandle::new(spec.ambient_dim, label, move |lambda| {
        &residue / (lambda - lambda_e) + h.evaluate(lambda)
    });
    Ok(ResonanceFamily {
        family,
        multiplicity: spec.rank,
    })
}

fn conditioned_matrix(rng: &mut impl Rng, dim: usize) -> Result<CMat> {
    for _ in 0..MAX_RESAMPLES {
        let m = random_matrix(rng, dim, dim);
        if condition_number(&m) <= MAX_FACTOR_CONDITION {
            return Ok(m);
        }
    }
    Err(Error::Consistency(
        "no well-conditioned factor found".into(),
    ))
}

/// `R(λ) = Φᵀ F₁(λ) (Σ_j (z(λ) − z(λ₀))^{k_j} P_j) F₂(λ) Φ + H(λ)`, with
/// `z(λ) = λ(n − λ)`, rank-one coordinate projections `P_j` on `ℂ^q`,
/// `q = Σ|k_j|`, polynomial factors `F₁`, `F₂` invertible at `λ₀` and `Φ: ℂ^{ambient} → ℂ^q`
/// of full row rank.
pub fn synth_resolvent_family(spec: &ResonanceSpec) -> Result<ResonanceFamily> {
    let n = spec.n as f64;
    let lambda0 = spec.center;
    if (lambda0 * 2.0 - n).norm() < 1e-12 {
        return Err(Error::Domain(
            "resolvent family at λ₀ = n/2, where z is not invertible".into(),
        ));
    }
    if spec.z_exponents.is_empty() || spec.z_exponents.iter().any(|&k| !(-16..0).contains(&k)) {
        return Err(Error::InvalidInput(
            "z_exponents must be nonempty and in [-16, -1]".into(),
        ));
    }
    let q: usize = spec
        .z_exponents
        .iter()
        .map(|k| k.unsigned_abs() as usize)
        .sum();
    if q > spec.ambient_dim {
        return Err(Error::InvalidInput(format!(
            "multiplicity q = {q} exceeds ambient dimension {}",
            spec.ambient_dim
        )));
    }
    let mut rng = rng_for(spec.seed);
    // The residue of F₁ w^{k} P F₂ is a sum of |k| rank-one terms built from
    // the first |k| − 1 derivatives of F₁ and F₂, so both need that degree
    // for the rank to reach |k|.
    let degree = spec
        .z_exponents
        .iter()
        .map(|k| k.unsigned_abs() as usize)
        .max()
        .unwrap_or(1)
        .saturating_sub(1)
        .max(1);
    let factor = |rng: &mut ChaCha8Rng| -> Result<PolyMatrix> {
        let mut coeffs = vec![conditioned_matrix(rng, q)?];
        coeffs.extend((0..degree).map(|_| random_matrix(rng, q, q).scale(0.5)));
        Ok(PolyMatrix {
            center: lambda0,
            coeffs,
        })
    };
    let f1 = factor(&mut rng)?;
    let f2 = factor(&mut rng)?;
    let phi = {
        let mut found = None;
        for _ in 0..MAX_RESAMPLES {
            let cand = random_matrix(&mut rng, q, spec.ambient_dim);
            if rank_info(&cand, 1e-3).rank == q {
                found = Some(cand);
                break;
            }
        }
        found.ok_or_else(|| Error::Consistency("could not draw Φ of full row rank".into()))?
    };
    let phi_t = phi.transpose();
    let h = symmetric_holomorphic_part(&mut rng, spec.ambient_dim, lambda0);
    let ks: Vec<i32> = spec.z_exponents.iter().map(|&k| k as i32).collect();
    let z0 = lambda0 * (n - lambda0);
    let label = format!("resolvent{:?}@{}", spec.z_exponents, spec.seed);
    let family = FamilyHandle::new(spec.ambient_dim, label, move |lambda| {
        let w = lambda * (n - lambda) - z0;
        let mut middle = f1.evaluate(lambda);
        for j in 0..q {
            let s = ks.get(j).map_or(Complex64::new(0.0, 0.0), |&k| w.powi(k));
            middle.column_mut(j).iter_mut().for_each(|z| *z *= s);
        }
        &phi_t * middle * f2.evaluate(lambda) * &phi + h.evaluate(lambda)
    });
    Ok(ResonanceFamily {
        family,
        multiplicity: q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degree_zero_factor_is_constant() {
        let u = make_unimodular(3, 0, c(0.0, 0.0), 7).unwrap();
        assert_eq!(u.poly.degree(), 0);
        let a = u.evaluate(c(0.3, 0.1));
        let b = u.evaluate(c(-5.0, 2.0));
        assert_eq!(a, b);
        assert!((a.determinant() - u.determinant).norm() < 1e-12);
    }

    #[test]
    fn determinant_is_constant() {
        let mut rng = rng_for(99);
        for seed in 0..10 {
            let u = make_unimodular(4, 3, c(0.5, -0.5), seed).unwrap();
            let d0 = u.determinant;
            for _ in 0..20 {
                let l = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let d = u.evaluate(l).determinant();
                assert!(
                    (d - d0).norm() <= 1e-10 * d0.norm(),
                    "seed {seed}: {d} vs {d0}"
                );
            }
        }
    }

    #[test]
    fn factors_are_conditioned_at_center() {
        let u = make_unimodular(6, 3, c(0.0, 0.0), 3).unwrap();
        assert!(condition_number(&u.evaluate(c(0.0, 0.0))) <= MAX_FACTOR_CONDITION);
    }

    #[test]
    fn same_spec_same_bits() {
        let spec = SynthSpec {
            dim: 3,
            center: c(0.1, 0.2),
            exponents: vec![-1, 0, 2],
            seed: 5,
            degree: 3,
        };
        let a = synth_family(&spec).unwrap();
        let b = synth_family(&spec).unwrap();
        let l = c(0.33, -0.17);
        assert_eq!(a.family.evaluate(l), b.family.evaluate(l));
        assert_eq!(a.exponents, vec![-1, 0, 2]);
    }

    #[test]
    fn exponent_count_must_match_dim() {
        let spec = SynthSpec {
            dim: 2,
            center: c(0.0, 0.0),
            exponents: vec![1],
            seed: 0,
            degree: 3,
        };
        assert!(synth_family(&spec).is_err());
    }

    #[test]
    fn eigen_family_is_complex_symmetric() {
        let spec = ResonanceSpec {
            ambient_dim: 5,
            n: 2,
            center: c(1.6, 0.0),
            rank: 2,
            z_exponents: vec![],
            seed: 11,
        };
        let f = synth_eigen_family(&spec).unwrap().family;
        let m = f.evaluate(c(1.3, 0.4));
        assert!((&m - m.transpose()).norm() < 1e-14);
    }

    #[test]
    fn eigen_family_rejects_critical_point() {
        let spec = ResonanceSpec {
            ambient_dim: 3,
            n: 2,
            center: c(1.0, 0.0),
            rank: 1,
            z_exponents: vec![],
            seed: 0,
        };
        assert!(matches!(synth_eigen_family(&spec), Err(Error::Domain(_))));
        let spec = ResonanceSpec {
            z_exponents: vec![-1],
            ..spec
        };
        assert!(matches!(
            synth_resolvent_family(&spec),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn resolvent_family_validates_exponents() {
        let spec = ResonanceSpec {
            ambient_dim: 4,
            n: 2,
            center: c(-0.5, 0.3),
            rank: 0,
            z_exponents: vec![-2, 1],
            seed: 0,
        };
        assert!(synth_resolvent_family(&spec).is_err());
        let spec = ResonanceSpec {
            z_exponents: vec![-3, -2],
            ..spec
        };
        assert!(synth_resolvent_family(&spec).is_err(), "q = 5 > ambient 4");
    }
}
