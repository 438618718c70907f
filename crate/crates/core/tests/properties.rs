use proptest::prelude::*;

use udkf::factorization::is_psd;
use udkf::matrix::mat_mul;
use udkf::propagation::{build_candidate, propagate_factors, PropagationInputs};
use udkf::rng::SplitMix64;
use udkf::update::{modified_agee_turner, standard_agee_turner, RankOneInputs, ScalarMeasurement};
use udkf::{reconstruct, udu_decompose, DiagonalVector, Matrix, UdFactors, UnitUpperTriangular};

fn random_factors(rng: &mut SplitMix64, n: usize) -> UdFactors {
    let mut u = UnitUpperTriangular::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            u.set(i, j, rng.uniform_in(-1.0, 1.0));
        }
    }
    let d = (0..n).map(|_| rng.uniform_in(0.05, 3.0)).collect::<Vec<_>>();
    UdFactors::new(u, DiagonalVector::new(d)).unwrap()
}

fn scalar(rng: &mut SplitMix64, n: usize) -> ScalarMeasurement {
    ScalarMeasurement {
        h_row: rng.normal_vec(n),
        r_scalar: rng.uniform_in(0.05, 2.0),
        value: rng.normal(),
        predicted: rng.normal(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mat_mul_is_associative(seed in any::<u64>(), a in 1usize..6, b in 1usize..6, c in 1usize..6, d in 1usize..6) {
        let mut rng = SplitMix64::new(seed);
        let x = rng.gaussian_matrix(a, b);
        let y = rng.gaussian_matrix(b, c);
        let z = rng.gaussian_matrix(c, d);
        let left = mat_mul(&mat_mul(&x, &y).unwrap(), &z).unwrap();
        let right = mat_mul(&x, &mat_mul(&y, &z).unwrap()).unwrap();
        prop_assert!(left.relative_distance(&right).unwrap() < 1e-12);
    }

    #[test]
    fn reconstruction_is_exactly_symmetric(seed in any::<u64>(), n in 1usize..12) {
        let f = random_factors(&mut SplitMix64::new(seed), n);
        prop_assert_eq!(reconstruct(&f.u, &f.d).unwrap().max_asymmetry(), 0.0);
    }

    #[test]
    fn decomposition_round_trips(seed in any::<u64>(), n in 1usize..16) {
        let p = SplitMix64::new(seed).random_spd(n);
        let f = udu_decompose(&p).unwrap();
        prop_assert!(f.covariance().relative_distance(&p).unwrap() < 1e-11);
        prop_assert!(f.d.is_nonnegative());
    }

    #[test]
    fn decomposition_recovers_factors(seed in any::<u64>(), n in 1usize..10) {
        let f = random_factors(&mut SplitMix64::new(seed), n);
        let again = udu_decompose(&f.covariance()).unwrap();
        for (a, b) in again.d.as_slice().iter().zip(f.d.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
        for (a, b) in again.u.packed().iter().zip(f.u.packed()) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn propagation_matches_dense(seed in any::<u64>(), n in 1usize..9, q in 0usize..5) {
        let mut rng = SplitMix64::new(seed);
        let prior = random_factors(&mut rng, n);
        let f = rng.gaussian_matrix(n, n);
        let g = rng.gaussian_matrix(n, q);
        let qd: Vec<f64> = (0..q).map(|_| rng.uniform_in(0.1, 1.0)).collect();
        let qm = Matrix::from_diagonal(&qd);
        let out = propagate_factors(&PropagationInputs { f_jac: &f, g_map: &g, q_cov: &qm, prior: &prior }).unwrap();
        let fp = mat_mul(&mat_mul(&f, &prior.covariance()).unwrap(), &f.transpose()).unwrap();
        let gq = mat_mul(&mat_mul(&g, &qm).unwrap(), &g.transpose()).unwrap();
        let dense = fp.add(&gq).unwrap();
        prop_assert!(out.factors.covariance().relative_distance(&dense).unwrap() < 1e-10);
        prop_assert!(out.factors.d.is_nonnegative());
    }

    #[test]
    fn propagation_rows_are_weighted_orthogonal(seed in any::<u64>(), n in 1usize..9, q in 0usize..5) {
        let mut rng = SplitMix64::new(seed);
        let prior = random_factors(&mut rng, n);
        let f = rng.gaussian_matrix(n, n);
        let g = rng.gaussian_matrix(n, q);
        let qm = Matrix::from_diagonal(&vec![0.5; q]);
        let mut ws = build_candidate(&PropagationInputs { f_jac: &f, g_map: &g, q_cov: &qm, prior: &prior }).unwrap();
        let tol = ws.default_tolerance();
        let out = ws.orthogonalize(tol).unwrap();
        prop_assert!(ws.max_orthogonality_defect() <= 1e-13);
        let uv = out.factors.u.to_matrix().mat_mul(&ws.v_rows).unwrap();
        prop_assert!(uv.relative_distance(&ws.w_rows).unwrap() < 1e-11);
    }

    #[test]
    fn scalar_update_keeps_d_nonnegative(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = SplitMix64::new(seed);
        let prior = random_factors(&mut rng, n);
        let out = modified_agee_turner(&prior, &scalar(&mut rng, n)).unwrap();
        prop_assert!(is_psd(&out.factors).psd);
    }

    #[test]
    fn scalar_gain_matches_dense(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = SplitMix64::new(seed);
        let prior = random_factors(&mut rng, n);
        let meas = scalar(&mut rng, n);
        let p = prior.covariance();
        let ph = p.mul_vec(&meas.h_row).unwrap();
        let s = meas.r_scalar + meas.h_row.iter().zip(&ph).map(|(a, b)| a * b).sum::<f64>();
        let out = modified_agee_turner(&prior, &meas).unwrap();
        prop_assert!((out.innovation_variance - s).abs() <= 1e-12 * s);
        for (k, e) in out.gain.iter().zip(&ph) {
            prop_assert!((k - e / s).abs() <= 1e-10 * (e / s).abs().max(1.0));
        }
    }

    #[test]
    fn sequential_updates_commute(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = SplitMix64::new(seed);
        let prior = random_factors(&mut rng, n);
        let a = scalar(&mut rng, n);
        let b = scalar(&mut rng, n);
        let ab = modified_agee_turner(&modified_agee_turner(&prior, &a).unwrap().factors, &b).unwrap();
        let ba = modified_agee_turner(&modified_agee_turner(&prior, &b).unwrap().factors, &a).unwrap();
        prop_assert!(ab.factors.covariance().relative_distance(&ba.factors.covariance()).unwrap() < 1e-9);
    }

    #[test]
    fn rank_one_update_matches_dense(seed in any::<u64>(), n in 1usize..10, c in 0.0f64..5.0) {
        let mut rng = SplitMix64::new(seed);
        let factors = random_factors(&mut rng, n);
        let a = rng.normal_vec(n);
        let mut expected = factors.covariance();
        for i in 0..n {
            for j in 0..n {
                expected[(i, j)] += c * a[i] * a[j];
            }
        }
        let out = standard_agee_turner(&RankOneInputs { factors, c, a }).unwrap();
        prop_assert!(out.covariance().relative_distance(&expected).unwrap() < 1e-10);
    }
}
