//! Built-in numerical checks run by `udkf selftest`.
//!
//! Each case compares a UD routine against an independent dense computation
//! on seeded inputs.

use crate::decorrelation::build_decorrelation;
use crate::factorization::udu_decompose;
use crate::filter::{initialize, StepInput, UdFilter};
use crate::matrix::{mat_mul, Matrix};
use crate::models::{constant_velocity_1d, LinearMeasurement, LinearProcess};
use crate::oracle::DenseEkf;
use crate::propagation::{propagate_factors, PropagationInputs};
use crate::rng::SplitMix64;
use crate::update::{direct_ud_update, modified_agee_turner, standard_agee_turner, RankOneInputs, ScalarMeasurement};

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestCase {
    pub name: &'static str,
    pub error: f64,
    pub tolerance: f64,
}

impl SelfTestCase {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

fn case(name: &'static str, error: crate::Result<f64>, tolerance: f64) -> SelfTestCase {
    SelfTestCase {
        name,
        error: error.unwrap_or(f64::INFINITY),
        tolerance,
    }
}

fn dense_update(p: &Matrix, h: &[f64], r: f64) -> (Vec<f64>, Matrix) {
    let ph = p.mul_vec(h).expect("conforming");
    let s = r + h.iter().zip(&ph).map(|(a, b)| a * b).sum::<f64>();
    let mut post = p.clone();
    for i in 0..h.len() {
        for j in 0..h.len() {
            post[(i, j)] -= ph[i] * ph[j] / s;
        }
    }
    (ph.iter().map(|v| v / s).collect(), post)
}

fn rel_vec(a: &[f64], b: &[f64]) -> f64 {
    let d = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    d / b.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0)
}

fn linear_scenario_divergence(seed: u64, n: usize, steps: usize) -> crate::Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let f = rng.random_orthogonal(n).scale(0.98);
    let g = rng.gaussian_matrix(n, 2);
    let q = Matrix::from_diagonal(&[0.1, 0.2]);
    let h = rng.gaussian_matrix(2, n);
    let r = Matrix::from_diagonal(&[0.3, 0.5]);
    let process = LinearProcess::new(f, g, q);
    let meas = LinearMeasurement::new(h, r);
    let p0 = rng.random_spd(n);
    let x0 = rng.normal_vec(n);
    let inputs: Vec<StepInput> = (0..steps)
        .map(|_| StepInput {
            u: vec![],
            y: Some(rng.normal_vec(2)),
        })
        .collect();
    let mut ud = UdFilter::default();
    let run = ud.run(&initialize(&x0, &p0)?, &process, &meas, &inputs);
    let dense = DenseEkf::default();
    let oracle = dense.run(&dense.initialize(&x0, &p0), &process, &meas, &inputs);
    let mut worst = 0.0_f64;
    for (a, b) in run.trajectory.iter().zip(&oracle.trajectory) {
        worst = worst
            .max(rel_vec(&a.x, &b.x))
            .max(a.covariance().relative_distance(&b.p)?);
    }
    Ok(worst)
}

/// Runs every check.
pub fn run_selftest() -> Vec<SelfTestCase> {
    let mut cases = Vec::new();

    cases.push(case(
        "udu 2x2 by hand",
        (|| {
            let p = Matrix::from_rows(&[[2.0, 1.0], [1.0, 1.0]])?;
            let f = udu_decompose(&p)?;
            Ok((f.u.get(0, 1) - 1.0).abs() + (f.d[0] - 1.0).abs() + (f.d[1] - 1.0).abs())
        })(),
        0.0,
    ));

    cases.push(case(
        "udu seeded 8x8 reconstruction",
        (|| {
            let p = SplitMix64::new(8).random_spd(8);
            udu_decompose(&p)?.covariance().relative_distance(&p)
        })(),
        1e-12,
    ));

    cases.push(case(
        "wmgs n=2 q=1 vs dense propagation",
        (|| {
            let mut rng = SplitMix64::new(21);
            let p = rng.random_spd(2);
            let f = rng.gaussian_matrix(2, 2);
            let g = rng.gaussian_matrix(2, 1);
            let q = Matrix::from_diagonal(&[0.7]);
            let prior = udu_decompose(&p)?;
            let out = propagate_factors(&PropagationInputs {
                f_jac: &f,
                g_map: &g,
                q_cov: &q,
                prior: &prior,
            })?;
            let dense =
                mat_mul(&mat_mul(&f, &p)?, &f.transpose())?.add(&mat_mul(&mat_mul(&g, &q)?, &g.transpose())?)?;
            out.factors.covariance().relative_distance(&dense)
        })(),
        1e-11,
    ));

    cases.push(case(
        "modified Agee-Turner n=3 vs dense update",
        (|| {
            let mut rng = SplitMix64::new(33);
            let p = rng.random_spd(3);
            let h = rng.normal_vec(3);
            let (k, post) = dense_update(&p, &h, 0.5);
            let meas = ScalarMeasurement {
                h_row: h,
                r_scalar: 0.5,
                value: 0.0,
                predicted: 0.0,
            };
            let out = modified_agee_turner(&udu_decompose(&p)?, &meas)?;
            Ok(rel_vec(&out.gain, &k).max(out.factors.covariance().relative_distance(&post)?))
        })(),
        1e-10,
    ));

    cases.push(case(
        "direct UD update vs Agee-Turner",
        (|| {
            let mut rng = SplitMix64::new(34);
            let prior = udu_decompose(&rng.random_spd(5))?;
            let meas = ScalarMeasurement {
                h_row: rng.normal_vec(5),
                r_scalar: 0.2,
                value: 0.0,
                predicted: 0.0,
            };
            let a = modified_agee_turner(&prior, &meas)?;
            let b = direct_ud_update(&prior, &meas)?;
            a.factors.covariance().relative_distance(&b.factors.covariance())
        })(),
        1e-9,
    ));

    cases.push(case(
        "standard Agee-Turner n=3 rank-one",
        (|| {
            let mut rng = SplitMix64::new(101);
            let prior = udu_decompose(&rng.random_spd(3))?;
            let a = vec![1.0, -1.0, 0.5];
            let out = standard_agee_turner(&RankOneInputs {
                factors: prior.clone(),
                c: 2.0,
                a: a.clone(),
            })?;
            let col = Matrix::column(&a);
            let expected = prior.covariance().add(&mat_mul(&col, &col.transpose())?.scale(2.0))?;
            out.covariance().relative_distance(&expected)
        })(),
        1e-11,
    ));

    cases.push(case(
        "decorrelation 2x2 back-substitution",
        (|| {
            let t = build_decorrelation(&Matrix::from_rows(&[[2.0, 1.0], [1.0, 1.0]])?, 0.0)?;
            let z = t.whiten(&[3.0, 1.0])?;
            Ok((z[0] - 2.0).abs() + (z[1] - 1.0).abs())
        })(),
        0.0,
    ));

    cases.push(case(
        "constant-velocity 5 steps vs dense EKF",
        (|| {
            let process = constant_velocity_1d(0.1, 0.05);
            let meas = LinearMeasurement::new(Matrix::from_rows(&[[1.0, 0.0]])?, Matrix::from_diagonal(&[0.2]));
            let p0 = Matrix::from_rows(&[[1.0, 0.2], [0.2, 0.5]])?;
            let x0 = [0.0, 1.0];
            let inputs: Vec<StepInput> = [0.1, 0.22, 0.29, 0.41, 0.5]
                .iter()
                .map(|&y| StepInput {
                    u: vec![],
                    y: Some(vec![y]),
                })
                .collect();
            let run = UdFilter::default().run(&initialize(&x0, &p0)?, &process, &meas, &inputs);
            let dense = DenseEkf::default();
            let oracle = dense.run(&dense.initialize(&x0, &p0), &process, &meas, &inputs);
            let mut worst = 0.0_f64;
            for (a, b) in run.trajectory.iter().zip(&oracle.trajectory) {
                worst = worst
                    .max(rel_vec(&a.x, &b.x))
                    .max(a.covariance().relative_distance(&b.p)?);
            }
            Ok(worst)
        })(),
        1e-10,
    ));

    cases.push(case(
        "linear 4-state 50 steps vs dense KF",
        linear_scenario_divergence(50, 4, 50),
        1e-9,
    ));

    cases.push(case(
        "correlated R vs dense batch update",
        (|| {
            let mut rng = SplitMix64::new(61);
            let p = rng.random_spd(3);
            let h = rng.gaussian_matrix(2, 3);
            let r = Matrix::from_rows(&[[1.0, 0.6], [0.6, 0.8]])?;
            let meas = LinearMeasurement::new(h, r);
            let x0 = rng.normal_vec(3);
            let y = rng.normal_vec(2);
            let est = initialize(&x0, &p)?;
            let (post, _) = UdFilter::default().measurement_update(&est, &meas, &y)?;
            let dense = DenseEkf::default();
            let oracle = dense.measurement_update(&dense.initialize(&x0, &p), &meas, &y)?;
            Ok(rel_vec(&post.x, &oracle.x).max(post.covariance().relative_distance(&oracle.p)?))
        })(),
        1e-9,
    ));

    cases
}
