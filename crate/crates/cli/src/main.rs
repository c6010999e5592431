//! `scatpole CONFIG.json`: run a batch of pole-data jobs and write a report.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 invalid config,
//! 3 a numerical guard tripped.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use scatpole::jobs::{run, JobConfig, Overrides};

#[derive(Debug, Parser)]
#[command(
    name = "scatpole",
    version,
    about = "Pole data and multiplicity checks for meromorphic matrix families"
)]
struct Args {
    /// JSON job configuration.
    config: PathBuf,
    /// Contour radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Quadrature nodes per contour (even, at least 16).
    #[arg(long)]
    nodes: Option<usize>,
    /// Relative rank and pole-detection tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Base seed for synthetic families.
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; stdout when neither this nor the config names one.
    #[arg(long)]
    out: Option<PathBuf>,
}

const CONFIG_ERROR: u8 = 2;

fn write(path: &Path, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        radius: args.radius,
        nodes: args.nodes,
        tol: args.tol,
        seed: args.seed,
        output: args.out,
    };
    let config = JobConfig::load(&args.config).and_then(|mut c| c.apply(&overrides).map(|_| c));
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("scatpole: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };

    let report = run(&config);
    let json = report.to_json();
    let written = match &config.output {
        Some(path) => write(path, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
    .and_then(|_| match &config.csv_output {
        Some(path) => write(path, &report.nu_table_csv()),
        None => Ok(()),
    });
    if let Err(e) = written {
        eprintln!("scatpole: {e}");
        return ExitCode::from(CONFIG_ERROR);
    }

    for job in &report.jobs {
        if let Some(err) = &job.error {
            eprintln!(
                "scatpole: job {} ({}): {}",
                job.index, job.kind, err.message
            );
        }
        for c in job.checks.iter().filter(|c| !c.passed) {
            eprintln!(
                "scatpole: job {} ({}): check failed: {}",
                job.index, job.kind, c.name
            );
        }
    }
    let s = &report.summary;
    eprintln!(
        "scatpole: {} jobs, {} passed, {} failed, {} errored; {}/{} checks passed",
        s.jobs,
        s.passed,
        s.failed,
        s.errored,
        s.checks - s.checks_failed,
        s.checks
    );
    ExitCode::from(report.exit_code() as u8)
}
