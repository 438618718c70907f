//! Command-line runner for scenario files and the stress benchmark.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use udkf::scenario::{parse_scenario, run_scenario, ScenarioError};
use udkf::selftest::run_selftest;
use udkf::stress::stress_benchmark;

const EXIT_INVALID: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

#[derive(Parser)]
#[command(name = "udkf", version, about = "UD-factorized Kalman filter scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its trajectory CSV and summary.
    Run {
        scenario: PathBuf,
        /// Directory for trajectory.csv and report.toml; overrides [output].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print wall time to stderr.
        #[arg(long)]
        timing: bool,
    },
    /// Compare anomaly counts of the UD and naive dense filters under ill-conditioning.
    Stress {
        /// Largest condition exponent; exponents 0..=E are swept.
        #[arg(long, default_value_t = 12)]
        max_exp: u32,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse a scenario and check its invariants without running it.
    Validate { scenario: PathBuf },
    /// Run the built-in numerical checks.
    Selftest,
}

fn write_file(path: &Path, contents: &str) -> Result<(), u8> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| {
            eprintln!("error: cannot create {}: {e}", parent.display());
            EXIT_INVALID
        })?;
    }
    std::fs::write(path, contents).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_INVALID
    })
}

fn report_scenario_error(e: &ScenarioError) -> u8 {
    eprintln!("error: {e}");
    EXIT_INVALID
}

fn run(scenario: &Path, out: Option<&Path>, timing: bool) -> Result<(), u8> {
    let cfg = parse_scenario(scenario).map_err(|e| report_scenario_error(&e))?;
    let report = run_scenario(&cfg).map_err(|e| report_scenario_error(&e))?;

    let configured = cfg.output.clone().unwrap_or_default();
    let (csv_path, report_path) = match out {
        Some(dir) => (Some(dir.join("trajectory.csv")), Some(dir.join("report.toml"))),
        None => (configured.trajectory, configured.report),
    };
    let summary = report.summary_text();
    if let Some(p) = &csv_path {
        write_file(p, &report.to_csv())?;
    }
    if let Some(p) = &report_path {
        write_file(p, &summary)?;
    }
    print!("{summary}");
    if timing {
        eprintln!("{}", report.timing_line());
    }
    match &report.summary.halted {
        Some(h) => {
            eprintln!("error: {} filter halted at epoch {}: {}", h.filter, h.epoch, h.reason);
            Err(EXIT_NUMERICAL)
        }
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, out, timing } => run(&scenario, out.as_deref(), timing),
        Command::Stress {
            max_exp,
            trials,
            seed,
            out,
        } => {
            let exponents: Vec<u32> = (0..=max_exp).collect();
            match stress_benchmark(&exponents, trials, seed) {
                Ok(report) => match out {
                    Some(p) => write_file(&p, &report.to_csv()),
                    None => {
                        print!("{}", report.to_csv());
                        Ok(())
                    }
                },
                Err(e) => {
                    eprintln!("error: {e}");
                    Err(EXIT_INVALID)
                }
            }
        }
        Command::Validate { scenario } => match parse_scenario(&scenario) {
            Ok(cfg) => {
                let dims = cfg.validate().expect("parse validates");
                println!(
                    "ok: {} model, n={} q={} m={}, {} steps",
                    cfg.model.name(),
                    dims.n,
                    dims.q,
                    dims.m,
                    cfg.steps
                );
                Ok(())
            }
            Err(e) => Err(report_scenario_error(&e)),
        },
        Command::Selftest => {
            let cases = run_selftest();
            for c in &cases {
                let tag = if c.passed() { "PASS" } else { "FAIL" };
                println!("[{tag}] {:<42} error {:.3e} (tol {:.0e})", c.name, c.error, c.tolerance);
            }
            if cases.iter().all(|c| c.passed()) {
                Ok(())
            } else {
                Err(EXIT_NUMERICAL)
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
