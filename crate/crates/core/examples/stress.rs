//! Ill-conditioning sweep: counts trials where the UD filter or the naive
//! dense filter loses positive semi-definiteness.
//!
//! cargo run --release --example stress

use udkf::stress::stress_benchmark;

fn main() {
    let exponents: Vec<u32> = (0..=14).step_by(2).collect();
    let report = stress_benchmark(&exponents, 50, 1).expect("exponents in range");
    println!("{:>8} {:>12} {:>15}", "cond", "UD anomalies", "dense anomalies");
    for row in &report.rows {
        println!(
            "{:>8} {:>12} {:>15}",
            format!("1e{}", row.exponent),
            row.ud_anomalies,
            row.dense_anomalies
        );
    }
}
