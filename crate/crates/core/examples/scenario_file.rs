//! Load a scenario file, run it, and print the summary and first CSV rows.
//!
//! cargo run --example scenario_file -- scenarios/constant_velocity.toml

use std::path::PathBuf;

use udkf::scenario::{parse_scenario, run_scenario};

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/constant_velocity.toml"));
    let cfg = match parse_scenario(&path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            std::process::exit(1);
        }
    };
    let report = run_scenario(&cfg).expect("validated scenario runs");
    print!("{}", report.summary_text());
    println!();
    for line in report.to_csv().lines().take(4) {
        println!("{line}");
    }
}
