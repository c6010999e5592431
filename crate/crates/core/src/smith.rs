//! Local Smith exponents of meromorphic matrix families.
//!
//! Near `λ₀` a family factors as `U₁(λ) diag((λ − λ₀)^{k_l}) U₂(λ)` with `U₁`,
//! `U₂` holomorphically invertible. The exponents `k_l` are recovered without
//! building the factors: multiplying by `(λ − λ₀)^p` turns the family into an
//! analytic germ `G`, and the kernel dimensions of the block lower-triangular
//! Toeplitz matrices `T_q = [G_{i−k}]_{0 ≤ k ≤ i ≤ q}` satisfy
//! `dim ker T_q = Σ_i min(κ_i, q + 1)` with `κ_i = k_i + p ≥ 0`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    expand_from_samples, rank_info, winding_number_det, CMat, ContourSamples, ContourSpec,
    FamilyHandle, DEFAULT_RANK_TOL,
};

/// Local Smith exponents `k_1 ≤ … ≤ k_m` of a family at `center`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmithExponents {
    pub center: Complex64,
    pub exponents: Vec<i64>,
    pub warnings: Vec<String>,
}

impl SmithExponents {
    pub fn new(center: Complex64, mut exponents: Vec<i64>) -> Self {
        exponents.sort_unstable();
        SmithExponents {
            center,
            exponents,
            warnings: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// `Σ k_l`, the order of `det F` at the center.
    pub fn total(&self) -> i64 {
        self.exponents.iter().sum()
    }
}

/// Nonnegative partial multiplicities of an analytic germ.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialMultiplicities {
    /// `κ_1 ≤ … ≤ κ_m`.
    pub kappas: Vec<usize>,
    /// `#{i : κ_i ≥ q}` for `q = 1, 2, …` up to and including the first zero.
    pub increments: Vec<usize>,
    pub warnings: Vec<String>,
}

fn toeplitz_block(germ: &[CMat], q: usize) -> CMat {
    let m = germ[0].nrows();
    let mut t: CMat = DMatrix::zeros(m * (q + 1), m * (q + 1));
    for i in 0..=q {
        for k in 0..=i {
            t.view_mut((i * m, k * m), (m, m)).copy_from(&germ[i - k]);
        }
    }
    t
}

/// Partial multiplicities `κ_i` of `G(λ) = Σ_j G_j (λ − λ₀)^j` from the ranks
/// of the block Toeplitz matrices `T_0, T_1, …`.
///
/// Stops at the first `q` with `dim ker T_q = dim ker T_{q−1}`; if the
/// supplied coefficients run out first the germ is reported as needing more
/// Taylor terms.
pub fn toeplitz_partial_multiplicities(germ: &[CMat], tol: f64) -> Result<PartialMultiplicities> {
    if germ.is_empty() {
        return Err(Error::InvalidInput("germ has no coefficients".into()));
    }
    let m = germ[0].nrows();
    if germ.iter().any(|g| g.shape() != (m, m)) {
        return Err(Error::InvalidInput(
            "germ coefficients must be square of equal size".into(),
        ));
    }
    partial_multiplicities_with(|j| germ.get(j).cloned(), tol)
}

/// As [`toeplitz_partial_multiplicities`], pulling `G_j` on demand so that
/// only the coefficients the rank sequence actually reaches are computed.
/// `next(j)` returns `None` once the supply is exhausted.
fn partial_multiplicities_with<F>(mut next: F, tol: f64) -> Result<PartialMultiplicities>
where
    F: FnMut(usize) -> Option<CMat>,
{
    let mut germ: Vec<CMat> = Vec::new();
    let mut warnings = Vec::new();
    let mut increments: Vec<usize> = Vec::new();
    let mut previous_kernel = 0usize;
    for q in 0.. {
        let Some(g) = next(q) else {
            return Err(Error::InsufficientOrder { supplied: q });
        };
        let m = germ.first().unwrap_or(&g).nrows();
        if g.shape() != (m, m) {
            return Err(Error::InvalidInput(
                "germ coefficients must be square of equal size".into(),
            ));
        }
        if g.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput(
                "germ coefficients must be finite".into(),
            ));
        }
        if m == 0 {
            return Ok(PartialMultiplicities {
                kappas: Vec::new(),
                increments: vec![0],
                warnings,
            });
        }
        germ.push(g);

        let info = rank_info(&toeplitz_block(&germ, q), tol);
        if info.ambiguous {
            warnings.push(format!(
                "ill-conditioned rank decision for T_{q}: a singular value lies within 10x of {:e}",
                info.threshold
            ));
        }
        let kernel = m * (q + 1) - info.rank;
        let Some(increment) = kernel.checked_sub(previous_kernel) else {
            increments.push(0);
            return Err(Error::NonMonotoneRanks { increments });
        };
        if increments.last().is_some_and(|&last| increment > last) || increment > m {
            increments.push(increment);
            return Err(Error::NonMonotoneRanks { increments });
        }
        increments.push(increment);
        previous_kernel = kernel;
        if increment == 0 {
            return Ok(PartialMultiplicities {
                kappas: kappas_from_increments(m, &increments),
                increments,
                warnings,
            });
        }
    }
    unreachable!("the rank loop only exits by returning")
}

/// `increments[q − 1] = #{κ ≥ q}`; the multiset follows by differencing.
fn kappas_from_increments(m: usize, increments: &[usize]) -> Vec<usize> {
    let mut kappas = vec![0; m - increments[0]];
    for (q, pair) in increments.windows(2).enumerate() {
        kappas.extend(std::iter::repeat_n(q + 1, pair[0] - pair[1]));
    }
    kappas
}

/// Tunables for [`meromorphic_exponents`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmithOptions {
    /// Largest pole order searched for; must exceed the true order.
    pub p_max: usize,
    /// Relative tolerance for pole detection and Toeplitz ranks.
    pub tol: f64,
    /// Taylor coefficients of the germ; `None` derives a budget from the
    /// pole order and the determinant winding.
    pub taylor_terms: Option<usize>,
}

impl Default for SmithOptions {
    fn default() -> Self {
        SmithOptions {
            p_max: 8,
            tol: DEFAULT_RANK_TOL,
            taylor_terms: None,
        }
    }
}

/// Smith exponents of `family` at the contour center.
pub fn meromorphic_exponents(
    family: &FamilyHandle,
    contour: &ContourSpec,
    opts: SmithOptions,
) -> Result<SmithExponents> {
    let samples = ContourSamples::collect(family, contour)?;
    let lead = expand_from_samples(&samples, opts.p_max, 0, opts.tol)?;
    let p = lead.pole_order;
    let m = family.dim();

    // Σ|k| ≤ |Σk| + 2·p·m and the winding supplies Σk. Without an explicit
    // budget the supply runs to twice that estimate; coefficients are only
    // computed as far as the rank sequence reaches, and never past N/2,
    // where they alias.
    let cap = match opts.taylor_terms {
        Some(j) => j,
        None => {
            let estimate = winding_number_det(family, contour)
                .map(|w| w.unsigned_abs() as usize)
                .unwrap_or(0)
                + 2 * p * m;
            2 * (p + estimate + 4)
        }
    }
    .min(contour.nodes / 2 - p);
    // Ranks are computed on coefficients of the normalized variable
    // (λ − λ₀)/r; rescaling the variable does not change the exponents.
    let result = partial_multiplicities_with(
        |j| (j < cap).then(|| samples.scaled_coefficient(j as i64 - p as i64)),
        opts.tol,
    )?;

    let exponents = result.kappas.iter().map(|&k| k as i64 - p as i64).collect();
    let mut out = SmithExponents::new(contour.center, exponents);
    out.warnings = result.warnings;
    Ok(out)
}

/// `N_{λ₀} = Σ_{k_l > 0} k_l`.
pub fn null_multiplicity(s: &SmithExponents) -> i64 {
    s.exponents.iter().filter(|&&k| k > 0).sum()
}

/// Null multiplicity of the inverse family, `Σ_{k_l < 0} (−k_l) ≥ 0`.
pub fn polar_null_multiplicity(s: &SmithExponents) -> i64 {
    s.exponents.iter().filter(|&&k| k < 0).map(|k| -k).sum()
}

/// `dim ker_{λ₀} = #{l : k_l > 0}`.
pub fn kernel_dimension(s: &SmithExponents) -> usize {
    s.exponents.iter().filter(|&&k| k > 0).count()
}

/// Exponents of `(λ − λ₀)^{−1} F(λ)`.
pub fn shifted_exponents(s: &SmithExponents) -> SmithExponents {
    SmithExponents {
        center: s.center,
        exponents: s.exponents.iter().map(|k| k - 1).collect(),
        warnings: s.warnings.clone(),
    }
}

/// Logarithmic residue consistency: the determinant winding equals
/// `Σ k_l = N(F) − N(F⁻¹)`.
pub fn log_residue_check(
    family: &FamilyHandle,
    contour: &ContourSpec,
    s: &SmithExponents,
) -> Result<bool> {
    let winding = winding_number_det(family, contour)?;
    let total = s.total();
    Ok(winding == total && total == null_multiplicity(s) - polar_null_multiplicity(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mat2(a: [f64; 4]) -> CMat {
        CMat::from_row_slice(2, 2, &a.map(|x| c(x, 0.0)))
    }

    #[test]
    fn diagonal_germ_in_smith_form() {
        // diag(1, λ)
        let germ = vec![mat2([1.0, 0.0, 0.0, 0.0]), mat2([0.0, 0.0, 0.0, 1.0])];
        let r = toeplitz_partial_multiplicities(&germ, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.kappas, vec![0, 1]);
        assert_eq!(r.increments, vec![1, 0]);
    }

    #[test]
    fn rank_one_leading_coefficient() {
        // [[1, λ], [λ, 2λ²]] reduces to diag(1, λ²) by R₂ − λR₁ then C₂ − λC₁.
        let germ = vec![
            mat2([1.0, 0.0, 0.0, 0.0]),
            mat2([0.0, 1.0, 1.0, 0.0]),
            mat2([0.0, 0.0, 0.0, 2.0]),
            mat2([0.0; 4]),
        ];
        let r = toeplitz_partial_multiplicities(&germ, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.kappas, vec![0, 2]);

        // [[1, λ], [λ, λ² + λ³]] has det λ³: κ = {0, 3}.
        let germ = vec![
            mat2([1.0, 0.0, 0.0, 0.0]),
            mat2([0.0, 1.0, 1.0, 0.0]),
            mat2([0.0, 0.0, 0.0, 1.0]),
            mat2([0.0, 0.0, 0.0, 1.0]),
            mat2([0.0; 4]),
        ];
        let r = toeplitz_partial_multiplicities(&germ, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.kappas, vec![0, 3]);
    }

    #[test]
    fn singular_germ_never_stabilizes() {
        // [[1, λ], [λ, λ²]] has identically vanishing determinant.
        let germ = vec![
            mat2([1.0, 0.0, 0.0, 0.0]),
            mat2([0.0, 1.0, 1.0, 0.0]),
            mat2([0.0, 0.0, 0.0, 1.0]),
            mat2([0.0; 4]),
            mat2([0.0; 4]),
        ];
        assert!(matches!(
            toeplitz_partial_multiplicities(&germ, DEFAULT_RANK_TOL),
            Err(Error::InsufficientOrder { supplied: 5 })
        ));
    }

    #[test]
    fn invertible_germ_is_all_zero() {
        let germ = vec![mat2([2.0, 1.0, 1.0, 3.0])];
        let r = toeplitz_partial_multiplicities(&germ, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.kappas, vec![0, 0]);
    }

    #[test]
    fn bad_germ_input() {
        assert!(toeplitz_partial_multiplicities(&[], DEFAULT_RANK_TOL).is_err());
        let germ = vec![mat2([1.0, 0.0, 0.0, 1.0]), CMat::zeros(3, 3)];
        assert!(toeplitz_partial_multiplicities(&germ, DEFAULT_RANK_TOL).is_err());
    }

    #[test]
    fn diagonal_meromorphic_family() {
        let center = c(0.4, -0.3);
        let f = FamilyHandle::diagonal(2, "diag", move |i, l| {
            let d = l - center;
            if i == 0 {
                d.inv()
            } else {
                d * d
            }
        });
        let contour = ContourSpec::new(center, 0.3).unwrap();
        let s = meromorphic_exponents(&f, &contour, SmithOptions::default()).unwrap();
        assert_eq!(s.exponents, vec![-1, 2]);
        assert!(log_residue_check(&f, &contour, &s).unwrap());
    }

    #[test]
    fn invertible_holomorphic_family() {
        let f = FamilyHandle::new(2, "holo", |l| {
            CMat::from_row_slice(2, 2, &[l + 2.0, c(1.0, 0.0), l * l, c(3.0, 1.0)])
        });
        let contour = ContourSpec::new(c(0.0, 0.0), 0.3).unwrap();
        let s = meromorphic_exponents(&f, &contour, SmithOptions::default()).unwrap();
        assert_eq!(s.exponents, vec![0, 0]);
        assert!(log_residue_check(&f, &contour, &s).unwrap());
    }

    #[test]
    fn derived_quantities() {
        let s = SmithExponents::new(c(0.0, 0.0), vec![2, -1]);
        assert_eq!(s.exponents, vec![-1, 2]);
        assert_eq!(null_multiplicity(&s), 2);
        assert_eq!(polar_null_multiplicity(&s), 1);
        assert_eq!(kernel_dimension(&s), 1);

        let zero = SmithExponents::new(c(0.0, 0.0), vec![0, 0, 0]);
        assert_eq!(null_multiplicity(&zero), 0);
        let poles = SmithExponents::new(c(0.0, 0.0), vec![-2, -1]);
        assert_eq!(polar_null_multiplicity(&poles), 3);
        let ones = SmithExponents::new(c(0.0, 0.0), vec![1, 1, 1]);
        assert_eq!(kernel_dimension(&ones), 3);
        let mixed = SmithExponents::new(c(0.0, 0.0), vec![-3, 1, 1, 2]);
        assert_eq!(null_multiplicity(&mixed), 4);
    }

    #[test]
    fn shift_examples() {
        let s = SmithExponents::new(c(0.0, 0.0), vec![0, 2]);
        assert_eq!(shifted_exponents(&s).exponents, vec![-1, 1]);
        let s = SmithExponents::new(c(0.0, 0.0), vec![1]);
        assert_eq!(shifted_exponents(&s).exponents, vec![0]);
    }
}
