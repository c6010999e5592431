#![no_main]

use libfuzzer_sys::fuzz_target;
use num_complex::Complex64;
use scatpole::numerics::DEFAULT_RANK_TOL;
use scatpole::smith::toeplitz_partial_multiplicities;
use scatpole::CMat;

// Layout: block size, germ length, then little-endian i16 pairs (re, im) in
// units of 1/256, zero-padded.
fuzz_target!(|data: &[u8]| {
    let [m, count, rest @ ..] = data else {
        return;
    };
    let m = 1 + (*m as usize % 4);
    let count = 1 + (*count as usize % 8);
    let mut values = rest
        .chunks(2)
        .map(|c| i16::from_le_bytes([c[0], *c.get(1).unwrap_or(&0)]) as f64 / 256.0);
    let mut next = || values.next().unwrap_or(0.0);
    let germ: Vec<CMat> = (0..count)
        .map(|_| CMat::from_fn(m, m, |_, _| Complex64::new(next(), next())))
        .collect();
    if let Ok(r) = toeplitz_partial_multiplicities(&germ, DEFAULT_RANK_TOL) {
        assert!(r.increments.windows(2).all(|w| w[0] >= w[1]));
    }
});
