//! Ill-conditioning stress comparison between the UD filter and a naive
//! dense filter.
//!
//! Each trial starts from a covariance with condition number `10^e` and
//! applies several epochs of propagation followed by strong measurements
//! (`r = 10^-e`). A UD trial is anomalous if any `D` entry goes negative,
//! anything becomes non-finite, or an update fails. A dense trial using
//! `P ← (I − K H) P` is anomalous if the symmetric part of `P` acquires a
//! negative eigenvalue, goes non-finite, or the innovation covariance cannot
//! be inverted.

use rayon::prelude::*;
use serde::Serialize;

use crate::factorization::FactorTolerances;
use crate::filter::{FilterConfig, UdFilter};
use crate::matrix::Matrix;
use crate::models::{LinearMeasurement, LinearProcess};
use crate::oracle::{min_eigenvalue, DenseEkf, UpdateForm};
use crate::rng::SplitMix64;

pub const STRESS_SCHEMA: &str = "udkf-stress/1";
pub const MAX_EXPONENT: u32 = 14;

const STATE_DIM: usize = 6;
const MEAS_PER_EPOCH: usize = 3;
const EPOCHS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub ud_anomaly: bool,
    pub dense_anomaly: bool,
    /// Smallest `D` entry seen by the UD filter.
    pub ud_min_d: f64,
    /// Smallest eigenvalue seen by the dense filter.
    pub dense_min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StressRow {
    pub exponent: u32,
    pub trials: usize,
    pub ud_anomalies: usize,
    pub dense_anomalies: usize,
    pub ud_min_d: f64,
    pub dense_min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StressReport {
    pub schema: String,
    pub seed: u64,
    pub rows: Vec<StressRow>,
}

/// Runs one trial with its own generator stream.
pub fn run_trial(exponent: u32, seed: u64) -> TrialOutcome {
    let mut rng = SplitMix64::new(seed);
    let n = STATE_DIM;
    let condition = 10f64.powi(exponent as i32);
    let p0 = rng.spd_with_condition(n, condition);
    let process = LinearProcess::new(
        rng.random_orthogonal(n),
        Matrix::identity(n),
        Matrix::from_diagonal(&[1e-3 / condition; STATE_DIM]),
    );
    let r = Matrix::from_diagonal(&[1.0 / condition; MEAS_PER_EPOCH]);
    let sensors: Vec<LinearMeasurement> = (0..EPOCHS)
        .map(|_| LinearMeasurement::new(rng.gaussian_matrix(MEAS_PER_EPOCH, n), r.clone()))
        .collect();
    let x0 = vec![0.0; n];
    let y = vec![0.0; MEAS_PER_EPOCH];

    let mut ud_anomaly = false;
    let mut ud_min_d = f64::INFINITY;
    let mut filter = UdFilter::new(FilterConfig {
        factor_tolerances: FactorTolerances {
            pivot: 0.0,
            ..FactorTolerances::default()
        },
        ..FilterConfig::default()
    });
    match filter.initialize(&x0, &p0) {
        Ok(mut est) => {
            for sensor in &sensors {
                let step = filter
                    .time_update(&est, &process, &[])
                    .and_then(|(prior, _)| filter.measurement_update(&prior, sensor, &y));
                match step {
                    Ok((post, _)) => {
                        let d = post.factors.d.as_slice();
                        ud_min_d = d.iter().copied().fold(ud_min_d, f64::min);
                        if d.iter().any(|v| !v.is_finite() || *v < 0.0) {
                            ud_anomaly = true;
                            break;
                        }
                        est = post;
                    }
                    Err(_) => {
                        ud_anomaly = true;
                        break;
                    }
                }
            }
        }
        Err(_) => ud_anomaly = true,
    }

    let mut dense_anomaly = false;
    let mut dense_min_eigenvalue = f64::INFINITY;
    let dense = DenseEkf::new(UpdateForm::Naive);
    let mut est = dense.initialize(&x0, &p0);
    for sensor in &sensors {
        let step = dense
            .time_update(&est, &process, &[])
            .and_then(|prior| dense.measurement_update(&prior, sensor, &y));
        match step {
            Ok(post) if post.p.as_slice().iter().all(|v| v.is_finite()) => {
                let eig = min_eigenvalue(&post.p);
                dense_min_eigenvalue = dense_min_eigenvalue.min(eig);
                if eig < 0.0 {
                    dense_anomaly = true;
                    break;
                }
                est = post;
            }
            _ => {
                dense_anomaly = true;
                break;
            }
        }
    }

    TrialOutcome {
        ud_anomaly,
        dense_anomaly,
        ud_min_d,
        dense_min_eigenvalue,
    }
}

/// Tabulates anomaly counts per condition exponent. Trial `t` uses the
/// generator seeded with `seed + t`, so the same geometry is reused across
/// exponents. Trials run in parallel; results do not depend on scheduling.
pub fn stress_benchmark(exponents: &[u32], trials: usize, seed: u64) -> Result<StressReport, String> {
    if let Some(e) = exponents.iter().find(|&&e| e > MAX_EXPONENT) {
        return Err(format!("condition exponent {e} outside [0, {MAX_EXPONENT}]"));
    }
    let rows = if trials == 0 {
        Vec::new()
    } else {
        exponents
            .iter()
            .map(|&exponent| {
                let outcomes: Vec<TrialOutcome> = (0..trials)
                    .into_par_iter()
                    .map(|t| run_trial(exponent, seed.wrapping_add(t as u64)))
                    .collect();
                StressRow {
                    exponent,
                    trials,
                    ud_anomalies: outcomes.iter().filter(|o| o.ud_anomaly).count(),
                    dense_anomalies: outcomes.iter().filter(|o| o.dense_anomaly).count(),
                    ud_min_d: outcomes.iter().map(|o| o.ud_min_d).fold(f64::INFINITY, f64::min),
                    dense_min_eigenvalue: outcomes
                        .iter()
                        .map(|o| o.dense_min_eigenvalue)
                        .fold(f64::INFINITY, f64::min),
                }
            })
            .collect()
    };
    Ok(StressReport {
        schema: STRESS_SCHEMA.into(),
        seed,
        rows,
    })
}

impl StressReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "schema",
            "exponent",
            "trials",
            "ud_anomalies",
            "dense_anomalies",
            "ud_min_d",
            "dense_min_eigenvalue",
        ])
        .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                self.schema.clone(),
                r.exponent.to_string(),
                r.trials.to_string(),
                r.ud_anomalies.to_string(),
                r.dense_anomalies.to_string(),
                r.ud_min_d.to_string(),
                r.dense_min_eigenvalue.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}
