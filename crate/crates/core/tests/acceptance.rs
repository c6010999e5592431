//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::time::{Duration, Instant};

use scatpole::hypmodel::{grid_point, nu_oracle, ModelParams};
use scatpole::jobs::{run, Job, JobConfig};
use scatpole::mult::model_scattering_pole_multiplicity;
use scatpole::numerics::NumericsConfig;
use scatpole::selftest::{self, model_truncation, CheckOutcome, MODEL_TOL};

const SEED: u64 = 0;
const ROUNDTRIP_LIMIT: Duration = Duration::from_secs(60);
const MODEL_TABLE_LIMIT: Duration = Duration::from_secs(30);

/// ν(n/2 − k) for k = 1..4: k² for n = 2 and Σ_{l ≤ k−2} dim H_l for n = 4.
const NU_TABLE: [(u32, [i64; 4]); 2] = [(2, [1, 4, 9, 16]), (4, [0, 1, 6, 20])];

struct Line {
    id: u32,
    passed: bool,
    text: String,
}

fn summary(c: &CheckOutcome) -> String {
    let mut s = format!("{} trials, {} failures", c.trials, c.failures);
    if let (Some(e), Some(t)) = (c.max_error, c.tolerance) {
        s += &format!(", max error {e:.2e} (tol {t:e})");
    }
    if let Some(n) = c.notes.first() {
        s += &format!("; first: {n}");
    }
    s
}

fn exact(id: u32, label: &str, c: &CheckOutcome, trials: usize) -> Line {
    Line {
        id,
        passed: c.passed && c.trials == trials,
        text: format!("{label}: {}", summary(c)),
    }
}

fn main() {
    let numerics = NumericsConfig::default();
    let mut lines = Vec::new();

    let t = Instant::now();
    let (roundtrip, log_residue) = selftest::smith_roundtrip(SEED, &numerics);
    let elapsed = t.elapsed();
    let mut l1 = exact(1, "smith round-trip", &roundtrip, 200);
    l1.passed &= elapsed < ROUNDTRIP_LIMIT;
    l1.text += &format!(
        ", {:.2} s (limit {} s)",
        elapsed.as_secs_f64(),
        ROUNDTRIP_LIMIT.as_secs()
    );
    lines.push(l1);
    lines.push(exact(2, "logarithmic residue identity", &log_residue, 200));
    lines.push(exact(
        3,
        "shift formula",
        &selftest::shift_formula(SEED, &numerics),
        100,
    ));
    lines.push(exact(
        4,
        "inverse duality",
        &selftest::inverse_duality(SEED, &numerics),
        50,
    ));

    let t = Instant::now();
    let mut table_ok = true;
    let mut got = Vec::new();
    for (n, expected) in NU_TABLE {
        let mut row = Vec::new();
        for (k, want) in (1..=4).zip(expected) {
            let point = grid_point(n, k);
            let l = model_truncation(k);
            let nu = ModelParams::new(n, l).and_then(|p| {
                model_scattering_pole_multiplicity(p, &numerics.contour(point.to_c64())?)
            });
            match nu {
                Ok(nu) => {
                    table_ok &= nu == want && nu == nu_oracle(&point, n, l);
                    row.push(nu.to_string());
                }
                Err(e) => {
                    table_ok = false;
                    row.push(format!("error ({e})"));
                }
            }
        }
        got.push(format!("n = {n}: [{}]", row.join(", ")));
    }
    let elapsed = t.elapsed();
    lines.push(Line {
        id: 5,
        passed: table_ok && elapsed < MODEL_TABLE_LIMIT,
        text: format!(
            "model nu table: {}, {:.2} s (limit {} s)",
            got.join("; "),
            elapsed.as_secs_f64(),
            MODEL_TABLE_LIMIT.as_secs()
        ),
    });

    lines.push(exact(
        6,
        "theorem identity on the model grid",
        &selftest::theorem_identity(&numerics),
        8,
    ));
    lines.push(exact(
        7,
        "resolvent-side multiplicity (lambda and z)",
        &selftest::resonance_multiplicities(SEED, &numerics),
        50,
    ));

    let fe = selftest::functional_equation(SEED);
    let un = selftest::unitarity(SEED);
    lines.push(Line {
        id: 8,
        passed: fe.passed
            && un.passed
            && fe.trials == 100
            && un.trials == 100
            && fe.tolerance == Some(MODEL_TOL)
            && un.tolerance == Some(MODEL_TOL),
        text: format!(
            "functional equation: {}; unitarity: {}",
            summary(&fe),
            summary(&un)
        ),
    });

    let config = JobConfig {
        schema_version: scatpole::jobs::SCHEMA_VERSION,
        seed: SEED,
        contour: Default::default(),
        tolerances: Default::default(),
        output: None,
        csv_output: None,
        jobs: vec![Job::Selftest],
    };
    let first = run(&config);
    let second = run(&config);
    let (a, b) = (first.to_json(), second.to_json());
    lines.push(Line {
        id: 9,
        passed: a == b && first.exit_code() == 0,
        text: format!(
            "determinism: two selftest reports of {} bytes {}, exit code {}",
            a.len(),
            if a == b { "identical" } else { "differ" },
            first.exit_code()
        ),
    });

    for l in &lines {
        println!(
            "criterion {} {} {}",
            l.id,
            if l.passed { "PASS" } else { "FAIL" },
            l.text
        );
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    println!(
        "acceptance: {} of {} criteria passed",
        lines.len() - failed,
        lines.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
