//! Batch jobs: JSON configuration, orchestration and deterministic reports.
//!
//! A config lists jobs; they run concurrently and their reports come back in
//! config order. Reports contain no timings and all maps are key-sorted, so
//! identical configs produce byte-identical output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::hypmodel::{grid_point, nu_oracle, residue_kernel_dim_model, ModelParams};
use crate::mult::{model_scattering_pole_multiplicity, verify_model_point, MultiplicityReport};
use crate::numerics::DEFAULT_MAGNITUDE_CAP;
use crate::numerics::{
    winding_number_det, ContourSpec, NumericsConfig, DEFAULT_NODES, DEFAULT_RANK_TOL,
};
use crate::point::Point;
use crate::selftest::{self, sub_seed};
use crate::smith::{
    kernel_dimension, meromorphic_exponents, null_multiplicity, polar_null_multiplicity,
    SmithOptions,
};
use crate::synth::{synth_family, SynthDraw, SynthSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Upper bound on synthetic families per round-trip job.
pub const MAX_ROUNDTRIP_COUNT: usize = 100_000;

const MAX_LISTED_FAILURES: usize = 10;

fn default_radius() -> f64 {
    0.3
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

fn default_rank_tol() -> f64 {
    DEFAULT_RANK_TOL
}

fn default_cap() -> f64 {
    DEFAULT_MAGNITUDE_CAP
}

fn default_p_max() -> usize {
    SmithOptions::default().p_max
}

fn default_count() -> usize {
    selftest::ROUNDTRIP_FAMILIES
}

fn default_extra() -> u32 {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourDefaults {
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

impl Default for ContourDefaults {
    fn default() -> Self {
        Self {
            radius: default_radius(),
            nodes: default_nodes(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative singular-value threshold for ranks and pole detection.
    #[serde(default = "default_rank_tol")]
    pub rank: f64,
    #[serde(default = "default_cap")]
    pub magnitude_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: default_rank_tol(),
            magnitude_cap: default_cap(),
        }
    }
}

/// One unit of work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Job {
    /// Smith exponents of one synthetic family.
    Smith {
        synth: SynthSpec,
        #[serde(default = "default_p_max")]
        p_max: usize,
    },
    /// Exponent recovery on seeded random families.
    SynthRoundtrip {
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default)]
        draw: SynthDraw,
        /// Analyze the pointwise inverse and expect negated exponents.
        #[serde(default)]
        inverted: bool,
    },
    /// `ν(n/2 − k)` table of the model with truncation `k + truncation_extra`.
    ModelNu {
        n: u32,
        ks: Vec<u32>,
        #[serde(default = "default_extra")]
        truncation_extra: u32,
    },
    /// Both sides of the multiplicity identity at the given points.
    VerifyTheorem {
        n: u32,
        points: Vec<Point>,
        /// Model truncation; defaults to `k + 2` at grid points and 2 elsewhere.
        #[serde(default)]
        truncation: Option<u32>,
    },
    /// The full deterministic property suite.
    Selftest,
}

impl Job {
    pub fn kind(&self) -> &'static str {
        match self {
            Job::Smith { .. } => "smith",
            Job::SynthRoundtrip { .. } => "synth-roundtrip",
            Job::ModelNu { .. } => "model-nu",
            Job::VerifyTheorem { .. } => "verify-theorem",
            Job::Selftest => "selftest",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Job::Smith { synth, p_max } => {
                if synth.dim == 0 || synth.dim > 64 || synth.exponents.len() != synth.dim {
                    return Err(Error::InvalidInput(format!(
                        "smith job needs 1 ≤ dim ≤ 64 with one exponent per dimension, got dim {} and {} exponents",
                        synth.dim,
                        synth.exponents.len()
                    )));
                }
                if synth.degree > 16
                    || *p_max > 64
                    || synth.exponents.iter().any(|k| k.unsigned_abs() > 64)
                {
                    return Err(Error::InvalidInput(
                        "smith job parameters out of range".into(),
                    ));
                }
                if !(synth.center.re.is_finite() && synth.center.im.is_finite()) {
                    return Err(Error::InvalidInput(
                        "smith job center must be finite".into(),
                    ));
                }
            }
            Job::SynthRoundtrip { count, draw, .. } => {
                if *count == 0 || *count > MAX_ROUNDTRIP_COUNT {
                    return Err(Error::InvalidInput(format!(
                        "round-trip count must be in 1..={MAX_ROUNDTRIP_COUNT}, got {count}"
                    )));
                }
                if draw.max_dim == 0
                    || draw.max_dim > 64
                    || draw.degree > 16
                    || draw.min_exponent > draw.max_exponent
                    || draw.min_exponent < -64
                    || draw.max_exponent > 64
                {
                    return Err(Error::InvalidInput(format!(
                        "invalid synthetic draw {draw:?}"
                    )));
                }
            }
            Job::ModelNu {
                n,
                ks,
                truncation_extra,
            } => {
                if ks.is_empty() || ks.iter().any(|&k| k == 0 || k > 64) {
                    return Err(Error::InvalidInput(
                        "model-nu needs a nonempty list of k in 1..=64".into(),
                    ));
                }
                if *truncation_extra > 64 {
                    return Err(Error::InvalidInput(
                        "truncation_extra must be at most 64".into(),
                    ));
                }
                for &k in ks {
                    ModelParams::new(*n, k + truncation_extra)?;
                }
            }
            Job::VerifyTheorem {
                n,
                points,
                truncation,
            } => {
                if points.is_empty() {
                    return Err(Error::InvalidInput(
                        "verify-theorem needs at least one point".into(),
                    ));
                }
                for p in points {
                    let z = p.to_c64();
                    if !(z.re.is_finite() && z.im.is_finite()) {
                        return Err(Error::InvalidInput(format!("point {p} is not finite")));
                    }
                    let k = p.grid_offset(*n);
                    if k.is_some_and(|k| k > 64) {
                        return Err(Error::InvalidInput(format!("grid point {p} is too deep")));
                    }
                    let l = truncation_for(k, *truncation);
                    ModelParams::new(*n, l)?;
                    if let (Some(k), Some(l)) = (k, truncation) {
                        if *l < k {
                            return Err(Error::InvalidInput(format!(
                                "truncation {l} is below k = {k} at grid point {p}"
                            )));
                        }
                    }
                }
            }
            Job::Selftest => {}
        }
        Ok(())
    }
}

fn truncation_for(grid_offset: Option<u32>, explicit: Option<u32>) -> u32 {
    explicit.unwrap_or(grid_offset.map_or(2, |k| k + 2))
}

/// Parsed batch configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub contour: ContourDefaults,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Report path; stdout when absent.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Optional `(n, k, λ₀, ν, correction)` table.
    #[serde(default)]
    pub csv_output: Option<PathBuf>,
    pub jobs: Vec<Job>,
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub radius: Option<f64>,
    pub nodes: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

impl JobConfig {
    /// Parse and validate.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: JobConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidInput(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(r) = o.radius {
            self.contour.radius = r;
        }
        if let Some(n) = o.nodes {
            self.contour.nodes = n;
        }
        if let Some(t) = o.tol {
            self.tolerances.rank = t;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.output {
            self.output = Some(out.clone());
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.jobs.is_empty() {
            return Err(Error::InvalidInput("config lists no jobs".into()));
        }
        let tol = self.tolerances.rank;
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidInput(format!(
                "rank tolerance must be in (0, 1), got {tol}"
            )));
        }
        if self.contour.nodes > 1 << 20 {
            return Err(Error::InvalidInput(format!(
                "too many contour nodes: {}",
                self.contour.nodes
            )));
        }
        ContourSpec::with_nodes(0.0.into(), self.contour.radius, self.contour.nodes)?
            .with_magnitude_cap(self.tolerances.magnitude_cap)?;
        self.jobs.iter().try_for_each(Job::validate)
    }

    pub fn numerics(&self) -> NumericsConfig {
        NumericsConfig {
            radius: self.contour.radius,
            nodes: self.contour.nodes,
            tol: self.tolerances.rank,
            magnitude_cap: self.tolerances.magnitude_cap,
        }
    }
}

/// How an error is reported and which exit code it maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorClass {
    /// Two routes that should agree did not.
    Consistency,
    NumericalGuard,
    /// Invalid input, domain error or violated contract.
    Input,
}

impl ErrorClass {
    pub fn of(e: &Error) -> Self {
        if e.is_numerical_guard() {
            ErrorClass::NumericalGuard
        } else if matches!(e, Error::Consistency(_)) {
            ErrorClass::Consistency
        } else {
            ErrorClass::Input
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Consistency => 1,
            ErrorClass::Input => 2,
            ErrorClass::NumericalGuard => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub class: ErrorClass,
    pub message: String,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        ErrorReport {
            class: ErrorClass::of(e),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

fn check(name: impl Into<String>, passed: bool) -> Check {
    Check {
        name: name.into(),
        passed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// One `(n, k, λ₀ = n/2 − k, ν, correction)` table row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuRow {
    pub n: u32,
    pub k: u32,
    pub lambda0: Point,
    pub truncation: u32,
    pub nu: i64,
    pub oracle: i64,
    pub correction: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobReport {
    pub index: usize,
    pub kind: &'static str,
    pub status: Status,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub nu_rows: Vec<NuRow>,
}

impl JobReport {
    pub fn exit_code(&self) -> i32 {
        match (&self.error, self.status) {
            (Some(e), _) => e.class.exit_code(),
            (None, Status::Pass) => 0,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub jobs: usize,
    pub passed: usize,
    pub failed: usize,
    pub errored: usize,
    pub checks: usize,
    pub checks_failed: usize,
    pub exit_code: i32,
}

/// Full batch report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub seed: u64,
    pub numerics: NumericsConfig,
    pub jobs: Vec<JobReport>,
    pub summary: Summary,
}

/// Exit code for a set of job reports: input errors dominate numerical
/// guards, which dominate check failures.
fn combined_exit_code(jobs: &[JobReport]) -> i32 {
    let codes: Vec<i32> = jobs.iter().map(JobReport::exit_code).collect();
    [2, 3, 1]
        .into_iter()
        .find(|c| codes.contains(c))
        .unwrap_or(0)
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn nu_rows(&self) -> impl Iterator<Item = &NuRow> {
        self.jobs.iter().flat_map(|j| j.nu_rows.iter())
    }

    /// `n,k,lambda0,nu,correction` table over all model rows.
    pub fn nu_table_csv(&self) -> String {
        let mut out = String::from("n,k,lambda0,nu,correction\n");
        for r in self.nu_rows() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.n, r.k, r.lambda0, r.nu, r.correction
            );
        }
        out
    }
}

/// Run every job of a validated config.
pub fn run(config: &JobConfig) -> Report {
    let numerics = config.numerics();
    let jobs: Vec<JobReport> = config
        .jobs
        .par_iter()
        .enumerate()
        .map(|(index, job)| run_job(index, job, config.seed, &numerics))
        .collect();
    let checks = jobs.iter().map(|j| j.checks.len()).sum();
    let checks_failed = jobs
        .iter()
        .flat_map(|j| &j.checks)
        .filter(|c| !c.passed)
        .count();
    let count = |s: Status| jobs.iter().filter(|j| j.status == s).count();
    let summary = Summary {
        jobs: jobs.len(),
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        errored: count(Status::Error),
        checks,
        checks_failed,
        exit_code: combined_exit_code(&jobs),
    };
    Report {
        schema_version: SCHEMA_VERSION,
        seed: config.seed,
        numerics,
        jobs,
        summary,
    }
}

struct Outcome {
    checks: Vec<Check>,
    result: Value,
    warnings: Vec<String>,
    nu_rows: Vec<NuRow>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("job result serializes")
}

pub fn run_job(index: usize, job: &Job, seed: u64, numerics: &NumericsConfig) -> JobReport {
    let outcome = match job {
        Job::Smith { synth, p_max } => smith_job(synth, *p_max, numerics),
        Job::SynthRoundtrip {
            count,
            draw,
            inverted,
        } => roundtrip_job(*count, draw, *inverted, seed, numerics),
        Job::ModelNu {
            n,
            ks,
            truncation_extra,
        } => model_nu_job(*n, ks, *truncation_extra, numerics),
        Job::VerifyTheorem {
            n,
            points,
            truncation,
        } => verify_job(*n, points, *truncation, numerics),
        Job::Selftest => Ok(selftest_job(seed, numerics)),
    };
    match outcome {
        Ok(o) => {
            let status = if o.checks.iter().all(|c| c.passed) {
                Status::Pass
            } else {
                Status::Fail
            };
            JobReport {
                index,
                kind: job.kind(),
                status,
                checks: o.checks,
                result: Some(o.result),
                error: None,
                warnings: o.warnings,
                nu_rows: o.nu_rows,
            }
        }
        Err(e) => JobReport {
            index,
            kind: job.kind(),
            status: Status::Error,
            checks: Vec::new(),
            result: None,
            error: Some(ErrorReport::from(&e)),
            warnings: Vec::new(),
            nu_rows: Vec::new(),
        },
    }
}

#[derive(Serialize)]
struct SmithResult {
    synth: SynthSpec,
    ground_truth: Vec<i64>,
    exponents: Vec<i64>,
    null_multiplicity: i64,
    polar_null_multiplicity: i64,
    kernel_dimension: usize,
    winding: i64,
}

fn smith_job(spec: &SynthSpec, p_max: usize, numerics: &NumericsConfig) -> Result<Outcome> {
    let fam = synth_family(spec)?;
    let contour = numerics.contour(spec.center)?;
    let opts = SmithOptions {
        p_max,
        tol: numerics.tol,
        ..SmithOptions::default()
    };
    let s = meromorphic_exponents(&fam.family, &contour, opts)?;
    let winding = winding_number_det(&fam.family, &contour)?;
    let result = SmithResult {
        synth: spec.clone(),
        ground_truth: fam.exponents.clone(),
        exponents: s.exponents.clone(),
        null_multiplicity: null_multiplicity(&s),
        polar_null_multiplicity: polar_null_multiplicity(&s),
        kernel_dimension: kernel_dimension(&s),
        winding,
    };
    let checks = vec![
        check("exponents-match-ground-truth", s.exponents == fam.exponents),
        check(
            "log-residue",
            winding == s.total()
                && s.total() == result.null_multiplicity - result.polar_null_multiplicity,
        ),
    ];
    Ok(Outcome {
        checks,
        result: to_value(&result),
        warnings: s.warnings,
        nu_rows: Vec::new(),
    })
}

#[derive(Serialize)]
struct RoundtripFailure {
    seed: u64,
    expected: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recovered: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    winding: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<ErrorReport>,
}

#[derive(Serialize)]
struct RoundtripResult {
    count: usize,
    draw: SynthDraw,
    inverted: bool,
    exponent_failures: usize,
    winding_failures: usize,
    failures: Vec<RoundtripFailure>,
}

/// Expected exponents, recovered exponents, winding, warnings.
type RoundtripTrial = (Vec<i64>, Vec<i64>, i64, Vec<String>);

fn roundtrip_job(
    count: usize,
    draw: &SynthDraw,
    inverted: bool,
    seed: u64,
    numerics: &NumericsConfig,
) -> Result<Outcome> {
    let trials: Vec<(u64, Result<RoundtripTrial>)> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let s = sub_seed(seed, 1, i);
            let run = || {
                let spec = draw.spec(s)?;
                let fam = synth_family(&spec)?;
                let (family, expected) = if inverted {
                    let neg: Vec<i64> = fam.exponents.iter().rev().map(|k| -k).collect();
                    (fam.family.inverted(), neg)
                } else {
                    (fam.family, fam.exponents)
                };
                let contour = numerics.contour(spec.center)?;
                let opts = SmithOptions {
                    tol: numerics.tol,
                    ..SmithOptions::default()
                };
                let got = meromorphic_exponents(&family, &contour, opts)?;
                let winding = winding_number_det(&family, &contour)?;
                Ok((expected, got.exponents, winding, got.warnings))
            };
            (s, run())
        })
        .collect();
    let mut exponent_failures = 0;
    let mut winding_failures = 0;
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    for (s, t) in trials {
        match t {
            Ok((expected, got, winding, w)) => {
                warnings.extend(w.into_iter().map(|w| format!("seed {s}: {w}")));
                let exp_ok = expected == got;
                let wind_ok = winding == expected.iter().sum::<i64>();
                exponent_failures += usize::from(!exp_ok);
                winding_failures += usize::from(!wind_ok);
                if !(exp_ok && wind_ok) && failures.len() < MAX_LISTED_FAILURES {
                    failures.push(RoundtripFailure {
                        seed: s,
                        expected,
                        recovered: Some(got),
                        winding: Some(winding),
                        error: None,
                    });
                }
            }
            Err(e) => {
                exponent_failures += 1;
                winding_failures += 1;
                if failures.len() < MAX_LISTED_FAILURES {
                    failures.push(RoundtripFailure {
                        seed: s,
                        expected: Vec::new(),
                        recovered: None,
                        winding: None,
                        error: Some(ErrorReport::from(&e)),
                    });
                }
            }
        }
    }
    let checks = vec![
        check("exponents-match-ground-truth", exponent_failures == 0),
        check("log-residue", winding_failures == 0),
    ];
    let result = RoundtripResult {
        count,
        draw: *draw,
        inverted,
        exponent_failures,
        winding_failures,
        failures,
    };
    Ok(Outcome {
        checks,
        result: to_value(&result),
        warnings,
        nu_rows: Vec::new(),
    })
}

fn model_nu_job(n: u32, ks: &[u32], extra: u32, numerics: &NumericsConfig) -> Result<Outcome> {
    let rows = ks
        .par_iter()
        .map(|&k| -> Result<NuRow> {
            let truncation = k + extra;
            let params = ModelParams::new(n, truncation)?;
            let lambda0 = grid_point(n, k);
            let nu =
                model_scattering_pole_multiplicity(params, &numerics.contour(lambda0.to_c64())?)?;
            let correction = residue_kernel_dim_model(n, k, truncation, numerics)? as i64;
            Ok(NuRow {
                n,
                k,
                lambda0,
                truncation,
                nu,
                oracle: nu_oracle(&lambda0, n, truncation),
                correction,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    for r in &rows {
        checks.push(check(
            format!("nu-matches-oracle k={}", r.k),
            r.nu == r.oracle,
        ));
        checks.push(check(
            format!("correction-equals-nu k={}", r.k),
            r.correction == r.nu,
        ));
    }
    Ok(Outcome {
        checks,
        result: serde_json::json!({ "n": n, "rows": to_value(&rows) }),
        warnings: Vec::new(),
        nu_rows: rows,
    })
}

fn verify_job(
    n: u32,
    points: &[Point],
    truncation: Option<u32>,
    numerics: &NumericsConfig,
) -> Result<Outcome> {
    let reports = points
        .par_iter()
        .map(|p| -> Result<MultiplicityReport> {
            let l = truncation_for(p.grid_offset(n), truncation);
            verify_model_point(ModelParams::new(n, l)?, p, numerics)
        })
        .collect::<Result<Vec<_>>>()?;
    let checks = reports
        .iter()
        .map(|r| check(format!("identity λ₀={}", r.lambda0), r.identity_ok))
        .collect();
    let nu_rows = reports
        .iter()
        .filter_map(|r| {
            r.lambda0.grid_offset(n).map(|k| NuRow {
                n,
                k,
                lambda0: r.lambda0,
                truncation: r.diagnostics.truncation,
                nu: r.nu,
                oracle: nu_oracle(&r.lambda0, n, r.diagnostics.truncation),
                correction: r.correction,
            })
        })
        .collect();
    let warnings = reports
        .iter()
        .flat_map(|r| r.diagnostics.warnings.clone())
        .collect();
    Ok(Outcome {
        checks,
        result: serde_json::json!({ "n": n, "points": to_value(&reports) }),
        warnings,
        nu_rows,
    })
}

fn selftest_job(seed: u64, numerics: &NumericsConfig) -> Outcome {
    let report = selftest::run(seed, numerics);
    let checks = report
        .checks
        .iter()
        .map(|c| check(c.name.clone(), c.passed))
        .collect();
    Outcome {
        checks,
        result: to_value(&report),
        warnings: Vec::new(),
        nu_rows: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<JobConfig> {
        JobConfig::from_json(text)
    }

    #[test]
    fn minimal_config_defaults() {
        let c = parse(r#"{"schema_version": 1, "jobs": [{"kind": "selftest"}]}"#).unwrap();
        assert_eq!(c.contour, ContourDefaults::default());
        assert_eq!(c.tolerances, Tolerances::default());
        assert_eq!(c.jobs, vec![Job::Selftest]);
    }

    #[test]
    fn unknown_fields_rejected() {
        for text in [
            r#"{"schema_version": 1, "jobs": [{"kind": "selftest"}], "extra": 1}"#,
            r#"{"schema_version": 1, "jobs": [{"kind": "model-nu", "n": 2, "ks": [1], "bogus": 0}]}"#,
            r#"{"schema_version": 1, "contour": {"radius": 0.3, "nodez": 256}, "jobs": [{"kind": "selftest"}]}"#,
            r#"{"schema_version": 1, "jobs": [{"kind": "teleport"}]}"#,
        ] {
            assert!(matches!(parse(text), Err(Error::InvalidInput(_))), "{text}");
        }
    }

    #[test]
    fn invalid_values_rejected() {
        for text in [
            r#"{"schema_version": 2, "jobs": [{"kind": "selftest"}]}"#,
            r#"{"schema_version": 1, "jobs": []}"#,
            r#"{"schema_version": 1, "contour": {"nodes": 15}, "jobs": [{"kind": "selftest"}]}"#,
            r#"{"schema_version": 1, "contour": {"radius": -1}, "jobs": [{"kind": "selftest"}]}"#,
            r#"{"schema_version": 1, "tolerances": {"rank": 0}, "jobs": [{"kind": "selftest"}]}"#,
            r#"{"schema_version": 1, "jobs": [{"kind": "model-nu", "n": 3, "ks": [1]}]}"#,
            r#"{"schema_version": 1, "jobs": [{"kind": "verify-theorem", "n": 2, "points": [{"rational": [-2, 1]}], "truncation": 1}]}"#,
            r#"{"schema_version": 1, "jobs": [{"kind": "smith", "synth": {"dim": 2, "center": [0, 0], "exponents": [1], "seed": 0}}]}"#,
        ] {
            assert!(matches!(parse(text), Err(Error::InvalidInput(_))), "{text}");
        }
    }

    #[test]
    fn overrides_apply_and_revalidate() {
        let mut c = parse(r#"{"schema_version": 1, "jobs": [{"kind": "selftest"}]}"#).unwrap();
        let o = Overrides {
            radius: Some(0.2),
            nodes: Some(128),
            tol: Some(1e-9),
            seed: Some(7),
            output: Some("r.json".into()),
        };
        c.apply(&o).unwrap();
        assert_eq!(
            (c.contour.radius, c.contour.nodes, c.tolerances.rank, c.seed),
            (0.2, 128, 1e-9, 7)
        );
        assert_eq!(c.output.as_deref(), Some(Path::new("r.json")));
        let bad = Overrides {
            nodes: Some(17),
            ..Overrides::default()
        };
        assert!(c.apply(&bad).is_err());
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(
            ErrorClass::of(&Error::InvalidInput(String::new())).exit_code(),
            2
        );
        assert_eq!(
            ErrorClass::of(&Error::ContractViolation(String::new())).exit_code(),
            2
        );
        assert_eq!(
            ErrorClass::of(&Error::Resolution { nodes: 1 }).exit_code(),
            3
        );
        assert_eq!(
            ErrorClass::of(&Error::Consistency(String::new())).exit_code(),
            1
        );
    }

    #[test]
    fn smith_job_example() {
        let c = parse(
            r#"{"schema_version": 1, "jobs": [{"kind": "smith",
                "synth": {"dim": 2, "center": [0.1, -0.2], "exponents": [2, -1], "seed": 3}}]}"#,
        )
        .unwrap();
        let r = run(&c);
        assert_eq!(r.exit_code(), 0);
        let res = r.jobs[0].result.as_ref().unwrap();
        assert_eq!(res["exponents"], serde_json::json!([-1, 2]));
        assert_eq!(res["null_multiplicity"], 2);
        assert_eq!(res["winding"], 1);
    }

    #[test]
    fn guard_errors_become_exit_three() {
        // Pole order 9 exceeds the default bound of 8.
        let c = parse(
            r#"{"schema_version": 1, "jobs": [{"kind": "smith",
                "synth": {"dim": 1, "center": [0, 0], "exponents": [-9], "seed": 0}}]}"#,
        )
        .unwrap();
        let r = run(&c);
        assert_eq!(r.jobs[0].status, Status::Error);
        assert_eq!(r.exit_code(), 3);
    }

    #[test]
    fn model_nu_rows_and_csv() {
        let c =
            parse(r#"{"schema_version": 1, "jobs": [{"kind": "model-nu", "n": 2, "ks": [1, 2]}]}"#)
                .unwrap();
        let r = run(&c);
        assert_eq!(r.exit_code(), 0);
        assert_eq!(
            r.nu_table_csv(),
            "n,k,lambda0,nu,correction\n2,1,0,1,1\n2,2,-1,4,4\n"
        );
    }

    #[test]
    fn combined_codes_prefer_input_errors() {
        let mk = |error: Option<ErrorClass>, status| JobReport {
            index: 0,
            kind: "smith",
            status,
            checks: Vec::new(),
            result: None,
            error: error.map(|class| ErrorReport {
                class,
                message: String::new(),
            }),
            warnings: Vec::new(),
            nu_rows: Vec::new(),
        };
        let fail = mk(None, Status::Fail);
        let guard = mk(Some(ErrorClass::NumericalGuard), Status::Error);
        let input = mk(Some(ErrorClass::Input), Status::Error);
        assert_eq!(combined_exit_code(std::slice::from_ref(&fail)), 1);
        assert_eq!(combined_exit_code(&[fail.clone(), guard.clone()]), 3);
        assert_eq!(combined_exit_code(&[guard, input, fail]), 2);
        assert_eq!(combined_exit_code(&[]), 0);
    }
}
