//! Deterministic property suite behind the `selftest` job.
//!
//! Every check draws its inputs from a fixed seed stream, so two runs with the
//! same seed and numerics produce identical outcomes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::hypmodel::{
    c_factor, grid_point, nu_oracle, renormalized_eigen, residue_kernel_dim_model, ModelParams,
};
use crate::mult::{
    ensure_eigenvalue_off_grid, model_scattering_pole_multiplicity, reflected_smith_check,
    resonance_multiplicity, resonance_multiplicity_in_z, verify_model_point,
};
use crate::numerics::{log_gamma, winding_number_det, NumericsConfig};
use crate::smith::{
    kernel_dimension, meromorphic_exponents, null_multiplicity, polar_null_multiplicity,
    SmithExponents, SmithOptions,
};
use crate::synth::{
    make_unimodular, synth_eigen_family, synth_family, synth_resolvent_family, ResonanceSpec,
    SynthDraw,
};

pub const ROUNDTRIP_FAMILIES: usize = 200;
pub const SHIFT_MULTISETS: usize = 100;
pub const INVERSE_SEEDS: usize = 50;
pub const RESONANCE_SEEDS: usize = 50;
pub const MODEL_SAMPLES: usize = 100;
pub const GAMMA_SAMPLES: usize = 1000;
/// Tolerance for the model functional equation and unitarity.
pub const MODEL_TOL: f64 = 1e-10;
const MAX_NOTES: usize = 5;

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub trials: usize,
    pub failures: usize,
    /// Largest observed error, for checks with a floating tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// First few failure descriptions.
    pub notes: Vec<String>,
}

impl CheckOutcome {
    fn exact(name: &str, trials: Vec<std::result::Result<(), String>>) -> Self {
        let total = trials.len();
        let notes: Vec<String> = trials.into_iter().filter_map(|t| t.err()).collect();
        Self {
            name: name.to_string(),
            passed: notes.is_empty(),
            trials: total,
            failures: notes.len(),
            max_error: None,
            tolerance: None,
            notes: notes.into_iter().take(MAX_NOTES).collect(),
        }
    }

    fn within(name: &str, tol: f64, trials: Vec<std::result::Result<f64, String>>) -> Self {
        let total = trials.len();
        let mut notes = Vec::new();
        let mut max_error = 0.0_f64;
        for (i, t) in trials.into_iter().enumerate() {
            match t {
                Ok(e) if e <= tol => max_error = max_error.max(e),
                Ok(e) => {
                    max_error = max_error.max(e);
                    notes.push(format!("sample {i}: error {e:e}"));
                }
                Err(msg) => notes.push(format!("sample {i}: {msg}")),
            }
        }
        Self {
            name: name.to_string(),
            passed: notes.is_empty(),
            trials: total,
            failures: notes.len(),
            max_error: Some(max_error),
            tolerance: Some(tol),
            notes: notes.into_iter().take(MAX_NOTES).collect(),
        }
    }
}

/// All outcomes, in a fixed order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Independent seed per (stream, trial).
pub fn sub_seed(seed: u64, stream: u64, trial: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(stream << 32)
        .wrapping_add(trial)
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(seed, stream, 0))
}

fn smith_opts(numerics: &NumericsConfig) -> SmithOptions {
    SmithOptions {
        tol: numerics.tol,
        ..SmithOptions::default()
    }
}

fn fmt_err<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Run the full suite.
pub fn run(seed: u64, numerics: &NumericsConfig) -> SelftestReport {
    let mut checks = Vec::new();
    let (roundtrip, log_residue) = smith_roundtrip(seed, numerics);
    checks.push(roundtrip);
    checks.push(log_residue);
    checks.push(shift_formula(seed, numerics));
    checks.push(inverse_duality(seed, numerics));
    checks.push(model_nu_table(numerics));
    checks.push(theorem_identity(numerics));
    checks.push(reflected_smith(numerics));
    checks.push(resonance_multiplicities(seed, numerics));
    checks.push(functional_equation(seed));
    checks.push(unitarity(seed));
    checks.push(c_factor_product(seed));
    checks.push(log_gamma_recurrence(seed));
    checks.push(log_gamma_reflection(seed));
    checks.push(unimodular_determinant(seed));
    SelftestReport { seed, checks }
}

fn recovered(spec_seed: u64, numerics: &NumericsConfig) -> Result<(Vec<i64>, SmithExponents, i64)> {
    let spec = SynthDraw::default().spec(spec_seed)?;
    let fam = synth_family(&spec)?;
    let contour = numerics.contour(spec.center)?;
    let s = meromorphic_exponents(&fam.family, &contour, smith_opts(numerics))?;
    let winding = winding_number_det(&fam.family, &contour)?;
    Ok((fam.exponents, s, winding))
}

/// Exponent recovery and the logarithmic residue identity on the same families.
pub fn smith_roundtrip(seed: u64, numerics: &NumericsConfig) -> (CheckOutcome, CheckOutcome) {
    let results: Vec<_> = (0..ROUNDTRIP_FAMILIES as u64)
        .into_par_iter()
        .map(|i| fmt_err(recovered(sub_seed(seed, 1, i), numerics)))
        .collect();
    let roundtrip = results
        .iter()
        .enumerate()
        .map(|(i, r)| match r {
            Ok((truth, s, _)) if *truth == s.exponents => Ok(()),
            Ok((truth, s, _)) => Err(format!(
                "family {i}: recovered {:?}, expected {truth:?}",
                s.exponents
            )),
            Err(e) => Err(format!("family {i}: {e}")),
        })
        .collect();
    let log_residue = results
        .iter()
        .enumerate()
        .map(|(i, r)| match r {
            Ok((truth, s, w)) => {
                let total: i64 = truth.iter().sum();
                let split = null_multiplicity(s) - polar_null_multiplicity(s);
                if *w == total && split == total {
                    Ok(())
                } else {
                    Err(format!(
                        "family {i}: winding {w}, Σk {total}, N − N⁻ {split}"
                    ))
                }
            }
            Err(e) => Err(format!("family {i}: {e}")),
        })
        .collect();
    (
        CheckOutcome::exact("smith-roundtrip", roundtrip),
        CheckOutcome::exact("log-residue", log_residue),
    )
}

/// `N((λ − λ₀)^{−1} F) = N(F) − dim ker F(λ₀)`, with both sides computed.
pub fn shift_formula(seed: u64, numerics: &NumericsConfig) -> CheckOutcome {
    let trials = (0..SHIFT_MULTISETS as u64)
        .into_par_iter()
        .map(|i| {
            let run = || -> Result<std::result::Result<(), String>> {
                let spec = SynthDraw::default().spec(sub_seed(seed, 2, i))?;
                let fam = synth_family(&spec)?;
                let contour = numerics.contour(spec.center)?;
                let center = spec.center;
                let shifted = fam.family.scaled("shifted", move |l| 1.0 / (l - center));
                let s = meromorphic_exponents(&fam.family, &contour, smith_opts(numerics))?;
                let t = meromorphic_exponents(&shifted, &contour, smith_opts(numerics))?;
                let truth = SmithExponents::new(center, fam.exponents);
                let expected = null_multiplicity(&truth) - kernel_dimension(&truth) as i64;
                let numeric = null_multiplicity(&s) - kernel_dimension(&s) as i64;
                let got = null_multiplicity(&t);
                Ok(if got == expected && numeric == expected {
                    Ok(())
                } else {
                    Err(format!("multiset {i}: N(shifted) {got}, N − dim ker {numeric}, expected {expected}"))
                })
            };
            fmt_err(run()).and_then(|r| r)
        })
        .collect();
    CheckOutcome::exact("shift-formula", trials)
}

/// Exponents of the pointwise inverse are the negated ground truth.
pub fn inverse_duality(seed: u64, numerics: &NumericsConfig) -> CheckOutcome {
    let trials = (0..INVERSE_SEEDS as u64)
        .into_par_iter()
        .map(|i| {
            let run = || -> Result<std::result::Result<(), String>> {
                let spec = SynthDraw::default().spec(sub_seed(seed, 3, i))?;
                let fam = synth_family(&spec)?;
                let contour = numerics.contour(spec.center)?;
                let s =
                    meromorphic_exponents(&fam.family.inverted(), &contour, smith_opts(numerics))?;
                let expected: Vec<i64> = fam.exponents.iter().rev().map(|k| -k).collect();
                Ok(if s.exponents == expected {
                    Ok(())
                } else {
                    Err(format!(
                        "seed {i}: inverse exponents {:?}, expected {expected:?}",
                        s.exponents
                    ))
                })
            };
            fmt_err(run()).and_then(|r| r)
        })
        .collect();
    CheckOutcome::exact("inverse-duality", trials)
}

/// Grid on which the model tables are checked: `n ∈ {2, 4}`, `k = 1..4`.
pub fn model_grid() -> Vec<(u32, u32)> {
    [2, 4]
        .into_iter()
        .flat_map(|n| (1..=4).map(move |k| (n, k)))
        .collect()
}

/// Truncation used for the model tables at offset `k`.
pub fn model_truncation(k: u32) -> u32 {
    k + 2
}

/// `ν(n/2 − k)` by numerical winding against the channel-order oracle.
pub fn model_nu_table(numerics: &NumericsConfig) -> CheckOutcome {
    let trials = model_grid()
        .into_par_iter()
        .map(|(n, k)| {
            let point = grid_point(n, k);
            let truncation = model_truncation(k);
            let run = || -> Result<i64> {
                let params = ModelParams::new(n, truncation)?;
                model_scattering_pole_multiplicity(params, &numerics.contour(point.to_c64())?)
            };
            let oracle = nu_oracle(&point, n, truncation);
            match fmt_err(run()) {
                Ok(nu) if nu == oracle => Ok(()),
                Ok(nu) => Err(format!("n = {n}, k = {k}: ν {nu}, oracle {oracle}")),
                Err(e) => Err(format!("n = {n}, k = {k}: {e}")),
            }
        })
        .collect();
    CheckOutcome::exact("model-nu-table", trials)
}

/// `0 = 0 + ν − correction` at every grid point, with the correction equal to
/// `ν`.
pub fn theorem_identity(numerics: &NumericsConfig) -> CheckOutcome {
    let trials = model_grid()
        .into_par_iter()
        .map(|(n, k)| {
            let run = || -> Result<std::result::Result<(), String>> {
                let truncation = model_truncation(k);
                let params = ModelParams::new(n, truncation)?;
                let r = verify_model_point(params, &grid_point(n, k), numerics)?;
                let kernel = residue_kernel_dim_model(n, k, truncation, numerics)? as i64;
                Ok(
                    if r.m_res == 0
                        && r.m_reflected == 0
                        && r.correction == kernel
                        && r.correction == r.nu
                        && r.identity_ok
                    {
                        Ok(())
                    } else {
                        Err(format!(
                            "n = {n}, k = {k}: m {}, m(n−λ₀) {}, ν {}, correction {}",
                            r.m_res, r.m_reflected, r.nu, r.correction
                        ))
                    },
                )
            };
            fmt_err(run())
                .and_then(|r| r)
                .map_err(|e| format!("n = {n}, k = {k}: {e}"))
        })
        .collect();
    CheckOutcome::exact("theorem-identity", trials)
}

/// `N(S̃) = m(n − λ₀) = 0` with exponents in `{−1, 0}` at each grid point.
pub fn reflected_smith(numerics: &NumericsConfig) -> CheckOutcome {
    let trials = model_grid()
        .into_par_iter()
        .map(|(n, k)| {
            let run = || -> Result<bool> {
                let params = ModelParams::new(n, model_truncation(k))?;
                reflected_smith_check(params, &grid_point(n, k), numerics)
            };
            match fmt_err(run()) {
                Ok(true) => Ok(()),
                Ok(false) => Err(format!("n = {n}, k = {k}: reflected Smith check failed")),
                Err(e) => Err(format!("n = {n}, k = {k}: {e}")),
            }
        })
        .collect();
    CheckOutcome::exact("reflected-smith", trials)
}

/// Resonance center `n/2 + s` with `|s| ∈ [0.8, 1.5]`.
fn resonance_center(rng: &mut impl Rng, n: u32) -> Complex64 {
    let radius = rng.gen_range(0.8..1.5);
    let angle = rng.gen_range(-PI..PI);
    n as f64 / 2.0 + Complex64::from_polar(radius, angle)
}

fn partition(rng: &mut impl Rng, mut q: i64) -> Vec<i64> {
    let mut parts = Vec::new();
    while q > 0 {
        let part = rng.gen_range(1..=q);
        parts.push(-part);
        q -= part;
    }
    parts
}

/// Eigen- and resolvent-style synthetic families, in `λ` and in `z`.
pub fn resonance_multiplicities(seed: u64, numerics: &NumericsConfig) -> CheckOutcome {
    const N: u32 = 2;
    let trials = (0..RESONANCE_SEEDS as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 4, i));
            let run = |rng: &mut ChaCha8Rng| -> Result<Vec<String>> {
                let mut problems = Vec::new();
                let p = 1 + (i % 4) as usize;
                let eigen = ResonanceSpec {
                    ambient_dim: p + 2,
                    n: N,
                    center: resonance_center(rng, N),
                    rank: p,
                    z_exponents: Vec::new(),
                    seed: sub_seed(seed, 5, i),
                };
                let q = 1 + (i % 5) as i64;
                let resolvent = ResonanceSpec {
                    ambient_dim: q as usize + 1,
                    n: N,
                    center: resonance_center(rng, N),
                    rank: 0,
                    z_exponents: partition(rng, q),
                    seed: sub_seed(seed, 6, i),
                };
                ensure_eigenvalue_off_grid(&eigen)?;
                let families = [
                    ("eigen", synth_eigen_family(&eigen)?, eigen.center),
                    (
                        "resolvent",
                        synth_resolvent_family(&resolvent)?,
                        resolvent.center,
                    ),
                ];
                for (kind, fam, center) in families {
                    let lam = resonance_multiplicity(
                        &fam.family,
                        &numerics.contour(center)?,
                        N,
                        numerics.tol,
                    )?;
                    let z_radius = 0.5 * (center - N as f64 / 2.0).norm_sqr();
                    let z = resonance_multiplicity_in_z(
                        &fam.family,
                        center,
                        N,
                        z_radius,
                        numerics.nodes,
                        numerics.tol,
                    )?;
                    if lam != fam.multiplicity || z != fam.multiplicity {
                        problems.push(format!(
                            "seed {i} {kind}: λ-plane {lam}, z-plane {z}, expected {}",
                            fam.multiplicity
                        ));
                    }
                }
                Ok(problems)
            };
            match fmt_err(run(&mut rng)) {
                Ok(p) if p.is_empty() => Ok(()),
                Ok(p) => Err(p.join("; ")),
                Err(e) => Err(format!("seed {i}: {e}")),
            }
        })
        .collect();
    CheckOutcome::exact("resonance-multiplicity", trials)
}

/// Sample `(λ, n, l)` away from the Gamma loci: `|Im λ| ≥ 0.05`.
fn model_sample(rng: &mut impl Rng) -> (Complex64, u32, u32) {
    let n = if rng.gen_bool(0.5) { 2 } else { 4 };
    let l = rng.gen_range(0..=6);
    let im = rng.gen_range(0.05..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    (Complex64::new(rng.gen_range(-3.0..5.0), im), n, l)
}

/// `s̃(λ, l) s̃(n − λ, l) = 1`.
pub fn functional_equation(seed: u64) -> CheckOutcome {
    let mut rng = rng(seed, 7);
    let trials = (0..MODEL_SAMPLES)
        .map(|_| {
            let (lambda, n, l) = model_sample(&mut rng);
            let a = fmt_err(renormalized_eigen(lambda, n, l))?;
            let b = fmt_err(renormalized_eigen(n as f64 - lambda, n, l))?;
            Ok((a * b - 1.0).norm())
        })
        .collect();
    CheckOutcome::within("functional-equation", MODEL_TOL, trials)
}

/// `|s̃(n/2 + it, l)| = 1`.
pub fn unitarity(seed: u64) -> CheckOutcome {
    let mut rng = rng(seed, 8);
    let trials = (0..MODEL_SAMPLES)
        .map(|_| {
            let (_, n, l) = model_sample(&mut rng);
            let t = rng.gen_range(-10.0..10.0);
            let v = fmt_err(renormalized_eigen(Complex64::new(n as f64 / 2.0, t), n, l))?;
            Ok((v.norm() - 1.0).abs())
        })
        .collect();
    CheckOutcome::within("unitarity", MODEL_TOL, trials)
}

/// `c(λ) c(n − λ) = 1`.
pub fn c_factor_product(seed: u64) -> CheckOutcome {
    let mut rng = rng(seed, 9);
    let trials = (0..MODEL_SAMPLES)
        .map(|_| {
            let (lambda, n, _) = model_sample(&mut rng);
            let a = fmt_err(c_factor(lambda, n))?;
            let b = fmt_err(c_factor(n as f64 - lambda, n))?;
            Ok((a * b - 1.0).norm())
        })
        .collect();
    CheckOutcome::within("c-factor-product", MODEL_TOL, trials)
}

/// Tolerances for the log-Gamma identities.
pub const GAMMA_RECURRENCE_TOL: f64 = 1e-11;
pub const GAMMA_REFLECTION_TOL: f64 = 1e-10;

/// Uniform in the box `[−8, 8]²`.
fn box8(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0))
}

/// Uniform in `|z| ≤ 20`, at distance ≥ 0.05 from every integer.
fn gamma_sample(rng: &mut impl Rng) -> Complex64 {
    loop {
        let z = Complex64::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
        let gap = (z - z.re.round()).norm();
        if z.norm() <= 20.0 && gap >= 0.05 {
            return z;
        }
    }
}

/// `|ln Γ(z + 1) − ln z − ln Γ(z)|` on the analytic branch.
pub fn log_gamma_recurrence(seed: u64) -> CheckOutcome {
    let mut rng = rng(seed, 10);
    let trials = (0..GAMMA_SAMPLES)
        .map(|_| {
            let z = gamma_sample(&mut rng);
            let a = fmt_err(log_gamma(z + 1.0))?;
            let b = fmt_err(log_gamma(z))?;
            Ok((a - z.ln() - b).norm())
        })
        .collect();
    CheckOutcome::within("log-gamma-recurrence", GAMMA_RECURRENCE_TOL, trials)
}

/// Relative error of `Γ(z) Γ(1 − z) = π / sin(πz)`.
pub fn log_gamma_reflection(seed: u64) -> CheckOutcome {
    let mut rng = rng(seed, 11);
    let trials = (0..GAMMA_SAMPLES)
        .map(|_| {
            let z = gamma_sample(&mut rng);
            let a = fmt_err(log_gamma(z))?;
            let b = fmt_err(log_gamma(1.0 - z))?;
            let expected = PI / (z * PI).sin();
            Ok(((a + b).exp() / expected - 1.0).norm())
        })
        .collect();
    CheckOutcome::within("log-gamma-reflection", GAMMA_REFLECTION_TOL, trials)
}

/// `det U(λ)` is constant for the synthetic unimodular factors.
pub fn unimodular_determinant(seed: u64) -> CheckOutcome {
    let mut rng = rng(seed, 12);
    let trials = (0..50u64)
        .map(|i| {
            let dim = rng.gen_range(1..=6);
            let center = box8(&mut rng) / 8.0;
            let u = fmt_err(make_unimodular(dim, 3, center, sub_seed(seed, 13, i)))?;
            let worst = (0..8)
                .map(|_| {
                    let lambda = center + box8(&mut rng) / 16.0;
                    let det = u.evaluate(lambda).determinant();
                    (det - u.determinant).norm() / u.determinant.norm()
                })
                .fold(0.0_f64, f64::max);
            Ok(worst)
        })
        .collect();
    CheckOutcome::within("unimodular-determinant", 1e-9, trials)
}
