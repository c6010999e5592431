use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use scatpole::numerics::{winding_number_det, ContourSamples, ContourSpec, DEFAULT_RANK_TOL};
use scatpole::smith::{
    kernel_dimension, meromorphic_exponents, null_multiplicity, polar_null_multiplicity,
    shifted_exponents, toeplitz_partial_multiplicities, SmithExponents, SmithOptions,
};
use scatpole::synth::{
    make_unimodular, synth_eigen_family, synth_family, ResonanceSpec, SynthDraw,
};

fn exponents_of(family: &scatpole::FamilyHandle, center: Complex64) -> Vec<i64> {
    let contour = ContourSpec::new(center, 0.3).unwrap();
    meromorphic_exponents(family, &contour, SmithOptions::default())
        .unwrap()
        .exponents
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unimodular_factors_leave_exponents_unchanged(seed in any::<u64>()) {
        let draw = SynthDraw { max_dim: 4, ..SynthDraw::default() };
        let spec = draw.spec(seed).unwrap();
        let fam = synth_family(&spec).unwrap();
        let u = make_unimodular(spec.dim, 2, spec.center, seed.wrapping_add(1)).unwrap().family("u");
        let v = make_unimodular(spec.dim, 2, spec.center, seed.wrapping_add(2)).unwrap().family("v");
        let plain = exponents_of(&fam.family, spec.center);
        prop_assert_eq!(&plain, &fam.exponents);
        prop_assert_eq!(exponents_of(&u.product(&fam.family).product(&v), spec.center), plain);
    }

    #[test]
    fn inverse_negates_exponents(seed in any::<u64>()) {
        let spec = SynthDraw::default().spec(seed).unwrap();
        let fam = synth_family(&spec).unwrap();
        let expected: Vec<i64> = fam.exponents.iter().rev().map(|k| -k).collect();
        prop_assert_eq!(exponents_of(&fam.family.inverted(), spec.center), expected);
    }

    #[test]
    fn exponent_sum_equals_winding(seed in any::<u64>()) {
        let spec = SynthDraw::default().spec(seed).unwrap();
        let fam = synth_family(&spec).unwrap();
        let contour = ContourSpec::new(spec.center, 0.3).unwrap();
        let s = meromorphic_exponents(&fam.family, &contour, SmithOptions::default()).unwrap();
        let w = winding_number_det(&fam.family, &contour).unwrap();
        prop_assert_eq!(s.total(), w);
        prop_assert_eq!(null_multiplicity(&s) - polar_null_multiplicity(&s), w);
    }

    #[test]
    fn toeplitz_increments_are_nonincreasing(seed in any::<u64>()) {
        // Germ of (λ − λ₀)^p F for a synthetic F with pole order p.
        let spec = SynthDraw::default().spec(seed).unwrap();
        let fam = synth_family(&spec).unwrap();
        let p = (-fam.exponents[0]).max(0);
        let contour = ContourSpec::new(spec.center, 0.3).unwrap();
        let samples = ContourSamples::collect(&fam.family, &contour).unwrap();
        let germ: Vec<_> = (0..24).map(|j| samples.scaled_coefficient(j - p)).collect();
        let r = toeplitz_partial_multiplicities(&germ, DEFAULT_RANK_TOL).unwrap();
        prop_assert!(r.increments.windows(2).all(|w| w[0] >= w[1]), "{:?}", r.increments);
        let kappas: Vec<i64> = r.kappas.iter().map(|&k| k as i64 - p).collect();
        prop_assert_eq!(kappas, fam.exponents);
    }

    #[test]
    fn shift_lowers_null_multiplicity_by_kernel_dimension(ks in prop::collection::vec(-4i64..=4, 1..8)) {
        let s = SmithExponents::new(Complex64::new(0.0, 0.0), ks);
        let t = shifted_exponents(&s);
        prop_assert_eq!(null_multiplicity(&t), null_multiplicity(&s) - kernel_dimension(&s) as i64);
    }

    #[test]
    fn synthetic_families_are_deterministic(seed in any::<u64>()) {
        let spec = SynthDraw::default().spec(seed).unwrap();
        let a = synth_family(&spec).unwrap();
        let b = synth_family(&spec).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let l = spec.center + Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let (x, y) = (a.family.evaluate(l), b.family.evaluate(l));
            prop_assert!(x.iter().zip(y.iter()).all(|(p, q)| p.re.to_bits() == q.re.to_bits() && p.im.to_bits() == q.im.to_bits()));
        }
    }

    #[test]
    fn eigen_families_are_complex_symmetric(seed in any::<u64>(), rank in 1usize..4, re in 1.2..3.0f64, im in -1.0..1.0f64) {
        let spec = ResonanceSpec {
            ambient_dim: rank + 2,
            n: 2,
            center: Complex64::new(re, im),
            rank,
            z_exponents: Vec::new(),
            seed,
        };
        let fam = synth_eigen_family(&spec).unwrap();
        let l = spec.center + Complex64::new(0.2, -0.1);
        let m = fam.family.evaluate(l);
        let asym = (&m - m.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(asym <= 1e-14 * m.iter().map(|z| z.norm()).fold(1.0, f64::max));
    }
}

#[test]
fn smith_exponents_of_textbook_germs() {
    // diag(λ^{-1}, λ^{2}) up to unimodular mixing.
    let center = Complex64::new(0.0, 0.0);
    let f = scatpole::FamilyHandle::new(2, "mixed", |l| {
        let d = scatpole::CMat::from_row_slice(2, 2, &[1.0 / l, 0.0.into(), 0.0.into(), l * l]);
        let u = scatpole::CMat::from_row_slice(2, 2, &[1.0.into(), l, 0.0.into(), 1.0.into()]);
        &u * d * u.transpose()
    });
    assert_eq!(exponents_of(&f, center), vec![-1, 2]);
}
