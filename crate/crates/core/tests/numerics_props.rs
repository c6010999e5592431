use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use scatpole::numerics::{
    laurent_coefficient, numerical_rank, winding_number_det, CMat, ContourSpec, FamilyHandle,
};
use scatpole::synth::{make_unimodular, synth_family, SynthDraw};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn small_draw() -> SynthDraw {
    SynthDraw {
        max_dim: 4,
        min_exponent: -2,
        max_exponent: 2,
        degree: 3,
    }
}

fn max_entry(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coefficients_agree_for_radius_and_half_radius(seed in any::<u64>()) {
        let spec = small_draw().spec(seed).unwrap();
        let fam = synth_family(&spec).unwrap();
        let big = ContourSpec::new(spec.center, 0.3).unwrap();
        let half = ContourSpec::new(spec.center, 0.15).unwrap();
        for j in -2..=3 {
            let a = laurent_coefficient(&fam.family, &big, j).unwrap();
            let b = laurent_coefficient(&fam.family, &half, j).unwrap();
            let diff = max_entry(&(&a - &b));
            prop_assert!(diff <= 1e-8 * max_entry(&a).max(1.0), "j = {j}: {diff:e}");
        }
    }

    #[test]
    fn doubling_nodes_past_the_knee_is_stable(re in -1.0..1.0f64, im in -1.0..1.0f64, p in 0i32..4) {
        // e^λ/(λ − λ₀)^p has A_j = e^{λ₀}/(j + p)!
        let center = c(re, im);
        let f = FamilyHandle::scalar("exp", move |l| l.exp() / (l - center).powi(p));
        let coarse = ContourSpec::with_nodes(center, 0.4, 64).unwrap();
        let fine = coarse.doubled();
        let mut factorial = 1.0;
        for j in -(p as i64)..=6 {
            if j + p as i64 > 0 {
                factorial *= (j + p as i64) as f64;
            }
            let a = laurent_coefficient(&f, &coarse, j).unwrap()[(0, 0)];
            let b = laurent_coefficient(&f, &fine, j).unwrap()[(0, 0)];
            prop_assert!((a - b).norm() < 1e-10);
            prop_assert!((b - center.exp() / factorial).norm() < 1e-10 * center.exp().norm());
        }
    }

    #[test]
    fn winding_is_additive_and_unimodular_invariant(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = small_draw().spec(s1).unwrap();
        let mut b = small_draw().spec(s2).unwrap();
        b.center = a.center;
        let fa = synth_family(&a).unwrap();
        let fb = synth_family(&b).unwrap();
        let contour = ContourSpec::new(a.center, 0.3).unwrap();
        let wa = winding_number_det(&fa.family, &contour).unwrap();
        let wb = winding_number_det(&fb.family, &contour).unwrap();
        prop_assert_eq!(wa, fa.exponents.iter().sum::<i64>());
        prop_assert_eq!(winding_number_det(&fa.family.direct_sum(&fb.family), &contour).unwrap(), wa + wb);

        let u = make_unimodular(a.dim, 2, a.center, s2).unwrap().family("u");
        let v = make_unimodular(a.dim, 2, a.center, s1 ^ 1).unwrap().family("v");
        let sandwiched = u.product(&fa.family).product(&v);
        prop_assert_eq!(winding_number_det(&sandwiched, &contour).unwrap(), wa);
    }

    #[test]
    fn rank_is_unitarily_invariant(dim in 2usize..7, rank in 0usize..7, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let rank = rank.min(dim);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut random = |r: usize, k: usize| {
            DMatrix::from_fn(r, k, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        };
        let a = &random(dim, rank) * &random(rank, dim);
        let u = random(dim, dim).qr().q();
        let v = random(dim, dim).qr().q();
        prop_assert_eq!(numerical_rank(&a, 1e-8), rank);
        prop_assert_eq!(numerical_rank(&(&u * &a), 1e-8), rank);
        prop_assert_eq!(numerical_rank(&(&a * &v), 1e-8), rank);
        prop_assert_eq!(numerical_rank(&(&u * &a * &v), 1e-8), rank);
    }
}

#[test]
fn winding_of_simple_scalars() {
    let contour = ContourSpec::new(c(0.0, 0.0), 0.5).unwrap();
    for k in -4i32..=4 {
        let f = FamilyHandle::scalar("power", move |l| (l * 2.0).powi(k) * (l + 3.0));
        assert_eq!(winding_number_det(&f, &contour).unwrap(), k as i64);
    }
}

#[test]
fn singular_node_is_rejected() {
    let contour = ContourSpec::new(c(0.0, 0.0), 0.5).unwrap();
    let f = FamilyHandle::scalar("pole on circle", |l| 1.0 / (l - 0.5));
    assert!(laurent_coefficient(&f, &contour, 0).is_err());
}
