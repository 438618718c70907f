//! Scalar measurement updates and rank-one modifications of UD factors.
//!
//! [`modified_agee_turner`] is the update the filter uses: it downdates the
//! factors by one scalar measurement and produces the Kalman gain in a single
//! forward sweep. [`direct_ud_update`] reaches the same posterior by
//! factoring `D̄ − a D̄w̄ w̄ᵀD̄` and multiplying into `Ū`; it exists to
//! cross-check the sweep. [`standard_agee_turner`] adds `c a aᵀ` with
//! `c >= 0` and is not used on the measurement path.

use crate::error::{check_finite, Error, Result};
use crate::factorization::{udu_decompose_with, FactorTolerances, UdFactors};
use crate::matrix::{DiagonalVector, Matrix};

/// One scalar measurement `ỹ = h x + v`, `v ~ N(0, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMeasurement {
    /// Jacobian row `Hᵢ` at the prior state.
    pub h_row: Vec<f64>,
    /// Noise variance `rᵢ`.
    pub r_scalar: f64,
    /// Measured value `ỹᵢ`.
    pub value: f64,
    /// Predicted value `hᵢ(x̂⁻)`.
    pub predicted: f64,
}

impl ScalarMeasurement {
    pub fn innovation(&self) -> f64 {
        self.value - self.predicted
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarUpdateResult {
    pub factors: UdFactors,
    /// Kalman gain column `K`.
    pub gain: Vec<f64>,
    pub innovation: f64,
    /// `H P̄ Hᵀ + r`, the final `α`.
    pub innovation_variance: f64,
}

/// Intermediate quantities of the modified Agee-Turner sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct AgeeTurnerScratch {
    /// `w = Ūᵀ Hᵢᵀ`.
    pub w: Vec<f64>,
    /// `v = D̄ w`.
    pub v: Vec<f64>,
    /// Running innovation variances `α₁ … α_n`.
    pub alpha: Vec<f64>,
    /// `λⱼ = −wⱼ / αⱼ₋₁`; the first entry is unused and left at zero.
    pub lambda: Vec<f64>,
}

/// Relative scale for the innovation-variance threshold.
pub const ALPHA_TOLERANCE: f64 = 1e-14;

fn check_measurement(prior: &UdFactors, meas: &ScalarMeasurement) -> Result<()> {
    let n = prior.dim();
    if meas.h_row.len() != n {
        return Err(Error::DimensionMismatch {
            op: "scalar update: H row vs factors",
            left: (1, meas.h_row.len()),
            right: (n, n),
        });
    }
    check_finite("measurement row", &meas.h_row)?;
    check_finite("measurement scalars", &[meas.r_scalar, meas.value, meas.predicted])?;
    if meas.r_scalar < 0.0 {
        return Err(Error::NegativeScalar {
            what: "measurement variance",
            value: meas.r_scalar,
        });
    }
    if let Some((index, value)) = prior.d.first_negative() {
        return Err(Error::NegativePriorD { index, value });
    }
    Ok(())
}

/// `1e-14 · (r + ‖h‖² tr(P̄))`.
fn alpha_tolerance(prior: &UdFactors, meas: &ScalarMeasurement) -> f64 {
    let h2: f64 = meas.h_row.iter().map(|h| h * h).sum();
    ALPHA_TOLERANCE * (meas.r_scalar + h2 * prior.trace())
}

/// Sequential scalar measurement update by the modified Agee-Turner sweep.
pub fn modified_agee_turner(prior: &UdFactors, meas: &ScalarMeasurement) -> Result<ScalarUpdateResult> {
    modified_agee_turner_traced(prior, meas).map(|(r, _)| r)
}

/// [`modified_agee_turner`], also returning the sweep's intermediates.
pub fn modified_agee_turner_traced(
    prior: &UdFactors,
    meas: &ScalarMeasurement,
) -> Result<(ScalarUpdateResult, AgeeTurnerScratch)> {
    check_measurement(prior, meas)?;
    let n = prior.dim();
    let u_bar = &prior.u;
    let d_bar = prior.d.as_slice();

    let w = u_bar.transpose_mul_vec(&meas.h_row);
    let v: Vec<f64> = d_bar.iter().zip(&w).map(|(d, w)| d * w).collect();

    let mut u_post = u_bar.clone();
    let mut d_post = vec![0.0; n];
    let mut gain = vec![0.0; n];
    let mut alpha = Vec::with_capacity(n);
    let mut lambda = vec![0.0; n];

    // The recursion seeds with α₀ = r so that the first diagonal follows the
    // same ratio rule as the rest: d₁ = d̄₁ r / α₁.
    let mut alpha_prev = meas.r_scalar;
    for j in 0..n {
        let alpha_j = alpha_prev + v[j] * w[j];
        // Equal α means no information reached this element.
        let ratio = if alpha_j == alpha_prev {
            1.0
        } else {
            alpha_prev / alpha_j
        };
        d_post[j] = d_bar[j] * ratio;
        if j > 0 {
            // With α_{j-1} = 0 every earlier v_i w_i vanished, so K_{j-1} is zero.
            let lam = if alpha_prev == 0.0 { 0.0 } else { -w[j] / alpha_prev };
            lambda[j] = lam;
            for i in 0..j {
                u_post.set(i, j, u_bar.get(i, j) + lam * gain[i]);
            }
        }
        for (i, k) in gain.iter_mut().enumerate().take(j + 1) {
            *k += v[j] * u_bar.get(i, j);
        }
        alpha.push(alpha_j);
        alpha_prev = alpha_j;
    }

    let alpha_n = alpha_prev;
    let tol = alpha_tolerance(prior, meas);
    if !(alpha_n > tol) {
        return Err(Error::ZeroInnovationVariance { alpha: alpha_n, tol });
    }
    gain.iter_mut().for_each(|k| *k /= alpha_n);

    let result = ScalarUpdateResult {
        factors: UdFactors {
            u: u_post,
            d: DiagonalVector::new(d_post),
        },
        gain,
        innovation: meas.innovation(),
        innovation_variance: alpha_n,
    };
    Ok((result, AgeeTurnerScratch { w, v, alpha, lambda }))
}

/// Reference scalar update: factor the bracketed middle term and multiply.
///
/// With `w̄ = Ūᵀ Hᵢᵀ` and `a = 1 / (w̄ᵀ D̄ w̄ + r)`, the posterior is
/// `Ū [D̄ − a D̄w̄ w̄ᵀD̄] Ūᵀ`. The bracket is factored as `𝒰 𝒟 𝒰ᵀ`, giving
/// `U⁺ = Ū 𝒰` and `D⁺ = 𝒟`.
pub fn direct_ud_update(prior: &UdFactors, meas: &ScalarMeasurement) -> Result<ScalarUpdateResult> {
    check_measurement(prior, meas)?;
    let n = prior.dim();
    let w = prior.u.transpose_mul_vec(&meas.h_row);
    let dw: Vec<f64> = prior.d.as_slice().iter().zip(&w).map(|(d, w)| d * w).collect();
    let variance = meas.r_scalar + dw.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
    let tol = alpha_tolerance(prior, meas);
    if !(variance > tol) {
        return Err(Error::ZeroInnovationVariance { alpha: variance, tol });
    }
    let a = 1.0 / variance;

    let mut middle = Matrix::from_diagonal(prior.d.as_slice());
    for i in 0..n {
        for j in 0..n {
            middle[(i, j)] -= a * dw[i] * dw[j];
        }
    }
    let inner = udu_decompose_with(&middle, FactorTolerances::default())?;
    let u_post = prior.u.mul(&inner.u)?;
    let gain: Vec<f64> = prior.u.mul_vec(&dw).into_iter().map(|k| k * a).collect();

    Ok(ScalarUpdateResult {
        factors: UdFactors { u: u_post, d: inner.d },
        gain,
        innovation: meas.innovation(),
        innovation_variance: variance,
    })
}

/// Factors plus the rank-one term `c a aᵀ` to add to them.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneInputs {
    pub factors: UdFactors,
    pub c: f64,
    pub a: Vec<f64>,
}

/// Standard Agee-Turner update: factors of `U D Uᵀ + c a aᵀ`, `c >= 0`.
///
/// Columns are processed from last to second; `a` is reduced in place
/// against each column before that column's coefficients are formed.
pub fn standard_agee_turner(inputs: &RankOneInputs) -> Result<UdFactors> {
    let f = &inputs.factors;
    let n = f.dim();
    if inputs.a.len() != n {
        return Err(Error::DimensionMismatch {
            op: "standard_agee_turner: a vs factors",
            left: (inputs.a.len(), 1),
            right: (n, n),
        });
    }
    check_finite("rank-one vector", &inputs.a)?;
    if !(inputs.c >= 0.0) {
        return Err(Error::NegativeScalar {
            what: "rank-one scale",
            value: inputs.c,
        });
    }
    let tol_pivot = FactorTolerances::default().pivot * f.d.max();

    let mut a = inputs.a.clone();
    let mut u = f.u.clone();
    let mut d = f.d.as_slice().to_vec();
    let mut c = inputs.c;
    for j in (1..n).rev() {
        let aj = a[j];
        if c == 0.0 || aj == 0.0 {
            // Nothing is added to this column; only the reduction of `a` remains.
            for k in 0..j {
                a[k] -= aj * f.u.get(k, j);
            }
            continue;
        }
        let d_old = d[j];
        let d_new = d_old + c * aj * aj;
        if d_new <= tol_pivot {
            return Err(Error::ZeroPivot { index: j, pivot: d_new });
        }
        d[j] = d_new;
        for k in 0..j {
            a[k] -= aj * f.u.get(k, j);
            u.set(k, j, f.u.get(k, j) + c * aj * a[k] / d_new);
        }
        c = c * d_old / d_new;
    }
    if n > 0 {
        d[0] += c * a[0] * a[0];
    }
    Ok(UdFactors {
        u,
        d: DiagonalVector::new(d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::udu_decompose;
    use crate::matrix::UnitUpperTriangular;
    use crate::rng::SplitMix64;

    fn meas(h: Vec<f64>, r: f64) -> ScalarMeasurement {
        ScalarMeasurement {
            h_row: h,
            r_scalar: r,
            value: 1.0,
            predicted: 0.25,
        }
    }

    /// Dense form of the scalar update: `K = P Hᵀ / s`, `P⁺ = P − K H P`.
    fn dense_scalar(p: &Matrix, h: &[f64], r: f64) -> (Vec<f64>, Matrix, f64) {
        let ph = p.mul_vec(h).unwrap();
        let s = r + h.iter().zip(&ph).map(|(a, b)| a * b).sum::<f64>();
        let k: Vec<f64> = ph.iter().map(|x| x / s).collect();
        let n = h.len();
        let mut post = p.clone();
        for i in 0..n {
            for j in 0..n {
                post[(i, j)] -= ph[i] * ph[j] / s;
            }
        }
        (k, post, s)
    }

    #[test]
    fn zero_row_carries_no_information() {
        let prior = udu_decompose(&SplitMix64::new(1).random_spd(4)).unwrap();
        let (out, scratch) = modified_agee_turner_traced(&prior, &meas(vec![0.0; 4], 0.7)).unwrap();
        assert_eq!(out.gain, vec![0.0; 4]);
        assert_eq!(out.factors, prior);
        assert_eq!(out.innovation_variance, 0.7);
        assert!(scratch.alpha.iter().all(|&a| a == 0.7));
        assert!(scratch.lambda.iter().all(|&l| l == 0.0));

        let direct = direct_ud_update(&prior, &meas(vec![0.0; 4], 0.7)).unwrap();
        assert_eq!(direct.gain, vec![0.0; 4]);
        assert!(
            direct
                .factors
                .covariance()
                .relative_distance(&prior.covariance())
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn scalar_kalman_update() {
        let (d, h, r) = (2.0, 3.0, 0.5);
        let prior = UdFactors::diagonal(vec![d]);
        for out in [
            modified_agee_turner(&prior, &meas(vec![h], r)).unwrap(),
            direct_ud_update(&prior, &meas(vec![h], r)).unwrap(),
        ] {
            let s = r + d * h * h;
            assert!((out.gain[0] - d * h / s).abs() < 1e-15);
            assert!((out.factors.d[0] - r * d / s).abs() < 1e-15);
            assert_eq!(out.innovation_variance, s);
            assert_eq!(out.innovation, 0.75);
        }
    }

    #[test]
    fn three_state_matches_dense() {
        let mut rng = SplitMix64::new(33);
        let p = rng.random_spd(3);
        let prior = udu_decompose(&p).unwrap();
        let h = rng.normal_vec(3);
        let (k, post, s) = dense_scalar(&p, &h, 0.5);
        let out = modified_agee_turner(&prior, &meas(h, 0.5)).unwrap();
        let knorm = k.iter().map(|x| x * x).sum::<f64>().sqrt();
        let kerr = k
            .iter()
            .zip(&out.gain)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(kerr <= 1e-10 * knorm);
        assert!(out.factors.covariance().relative_distance(&post).unwrap() <= 1e-10);
        assert!((out.innovation_variance - s).abs() <= 1e-12 * s);
    }

    #[test]
    fn alpha_is_monotone_and_bounded_by_r() {
        let mut rng = SplitMix64::new(2);
        let prior = udu_decompose(&rng.random_spd(6)).unwrap();
        let (_, scratch) = modified_agee_turner_traced(&prior, &meas(rng.normal_vec(6), 0.3)).unwrap();
        assert!(scratch.alpha[0] >= 0.3);
        assert!(scratch.alpha.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn perfect_measurement_gives_singular_posterior() {
        let mut rng = SplitMix64::new(6);
        let p = rng.random_spd(3);
        let prior = udu_decompose(&p).unwrap();
        let h = vec![1.0, 0.0, 0.0];
        let out = modified_agee_turner(&prior, &meas(h.clone(), 0.0)).unwrap();
        let (_, post, _) = dense_scalar(&p, &h, 0.0);
        assert!(out.factors.covariance().relative_distance(&post).unwrap() < 1e-12);
        assert!(out.factors.d.is_nonnegative());
        // Measured component now has zero variance.
        assert!(out.factors.covariance()[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn perfect_measurement_of_trailing_state() {
        // w₁ = 0 with r = 0 leaves α₁ = 0 before information arrives.
        let prior = udu_decompose(&Matrix::from_diagonal(&[2.0, 3.0])).unwrap();
        let out = modified_agee_turner(&prior, &meas(vec![0.0, 1.0], 0.0)).unwrap();
        assert_eq!(out.factors.d.as_slice(), &[2.0, 0.0]);
        assert_eq!(out.gain, vec![0.0, 1.0]);
    }

    #[test]
    fn update_errors() {
        let prior = UdFactors::diagonal(vec![1.0, 1.0]);
        assert!(matches!(
            modified_agee_turner(&prior, &meas(vec![0.0, 0.0], 0.0)),
            Err(Error::ZeroInnovationVariance { .. })
        ));
        assert!(matches!(
            modified_agee_turner(&UdFactors::diagonal(vec![1.0, -1.0]), &meas(vec![1.0, 0.0], 1.0)),
            Err(Error::NegativePriorD { index: 1, .. })
        ));
        assert!(matches!(
            modified_agee_turner(&prior, &meas(vec![1.0], 1.0)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            modified_agee_turner(&prior, &meas(vec![1.0, 0.0], -1.0)),
            Err(Error::NegativeScalar { .. })
        ));
        assert!(matches!(
            direct_ud_update(&prior, &meas(vec![0.0, 0.0], 0.0)),
            Err(Error::ZeroInnovationVariance { .. })
        ));
    }

    #[test]
    fn rank_one_zero_scale_is_exact_noop() {
        let prior = udu_decompose(&SplitMix64::new(17).random_spd(5)).unwrap();
        let out = standard_agee_turner(&RankOneInputs {
            factors: prior.clone(),
            c: 0.0,
            a: vec![1.0, -2.0, 3.0, 0.5, 0.1],
        })
        .unwrap();
        assert_eq!(out, prior);
    }

    #[test]
    fn rank_one_scalar() {
        let out = standard_agee_turner(&RankOneInputs {
            factors: UdFactors::diagonal(vec![2.0]),
            c: 3.0,
            a: vec![0.5],
        })
        .unwrap();
        assert_eq!(out.d.as_slice(), &[2.75]);
        assert_eq!(out.u, UnitUpperTriangular::identity(1));
    }

    #[test]
    fn rank_one_three_state() {
        let mut rng = SplitMix64::new(101);
        let mut u = UnitUpperTriangular::identity(3);
        for i in 0..3 {
            for j in i + 1..3 {
                u.set(i, j, rng.uniform_in(-1.0, 1.0));
            }
        }
        let d = DiagonalVector::new(vec![
            rng.uniform_in(0.5, 1.5),
            rng.uniform_in(0.5, 1.5),
            rng.uniform_in(0.5, 1.5),
        ]);
        let factors = UdFactors::new(u, d).unwrap();
        let a = vec![1.0, -1.0, 0.5];
        let out = standard_agee_turner(&RankOneInputs {
            factors: factors.clone(),
            c: 2.0,
            a: a.clone(),
        })
        .unwrap();
        let diff = out.covariance().sub(&factors.covariance()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((diff[(i, j)] - 2.0 * a[i] * a[j]).abs() <= 1e-11);
            }
        }
    }

    #[test]
    fn rank_one_rejects_negative_scale() {
        let f = UdFactors::diagonal(vec![1.0]);
        assert!(standard_agee_turner(&RankOneInputs {
            factors: f,
            c: -1.0,
            a: vec![1.0]
        })
        .is_err());
    }
}
