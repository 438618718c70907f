//! Whitening of correlated measurement noise.
//!
//! With `R = U_r D_r U_rᵀ`, premultiplying the measurement equation by
//! `U_r⁻¹` leaves noise with the diagonal covariance `D_r`, so the transformed
//! components can be processed one scalar at a time. `U_r⁻¹` is never formed;
//! every transform is a back-substitution against the unit triangle.

use crate::error::{check_finite, Error, Result};
use crate::factorization::{udu_decompose_with, FactorTolerances};
use crate::matrix::{DiagonalVector, Matrix, UnitUpperTriangular};

#[derive(Debug, Clone, PartialEq)]
pub struct DecorrelationTransform {
    pub u_r: UnitUpperTriangular,
    pub d_r: DiagonalVector,
}

/// Output of [`decorrelate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Decorrelated {
    /// `z = U_r⁻¹ y`.
    pub z: Vec<f64>,
    /// `H_z = U_r⁻¹ H`.
    pub h_z: Matrix,
    /// Diagonal noise variances of `z`.
    pub d_r: DiagonalVector,
}

/// Solves `U x = b` in place for unit upper-triangular `U`.
pub fn back_substitute(u: &UnitUpperTriangular, b: &mut [f64]) {
    let n = u.dim();
    debug_assert_eq!(b.len(), n);
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| u.get(i, j) * b[j]).sum();
        b[i] -= s;
    }
}

/// Factors a correlated measurement covariance.
///
/// `tol` is the smallest `D_r` entry accepted; anything at or below it means
/// `r_c` is not positive definite.
pub fn build_decorrelation(r_c: &Matrix, tol: f64) -> Result<DecorrelationTransform> {
    let f = udu_decompose_with(r_c, FactorTolerances::default())?;
    if let Some(index) = f.d.as_slice().iter().position(|&d| !(d > tol)) {
        return Err(Error::NotPositiveDefinite {
            index,
            value: f.d[index],
        });
    }
    Ok(DecorrelationTransform { u_r: f.u, d_r: f.d })
}

impl DecorrelationTransform {
    pub fn dim(&self) -> usize {
        self.u_r.dim()
    }

    /// `U_r⁻¹ y`.
    pub fn whiten(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                op: "decorrelate: y vs R",
                left: (y.len(), 1),
                right: (self.dim(), self.dim()),
            });
        }
        let mut z = y.to_vec();
        back_substitute(&self.u_r, &mut z);
        Ok(z)
    }

    /// `U_r⁻¹ H`, one column at a time.
    pub fn whiten_matrix(&self, h: &Matrix) -> Result<Matrix> {
        if h.rows() != self.dim() {
            return Err(Error::DimensionMismatch {
                op: "decorrelate: H vs R",
                left: h.shape(),
                right: (self.dim(), self.dim()),
            });
        }
        let mut out = h.clone();
        let mut col = vec![0.0; h.rows()];
        for j in 0..h.cols() {
            for (i, c) in col.iter_mut().enumerate() {
                *c = h[(i, j)];
            }
            back_substitute(&self.u_r, &mut col);
            for (i, &c) in col.iter().enumerate() {
                out[(i, j)] = c;
            }
        }
        Ok(out)
    }
}

/// Transforms a correlated measurement vector and its Jacobian so that the
/// noise on the result is diagonal with variances `D_r`.
pub fn decorrelate(t: &DecorrelationTransform, y: &[f64], h_jac: &Matrix) -> Result<Decorrelated> {
    check_finite("measurement", y)?;
    Ok(Decorrelated {
        z: t.whiten(y)?,
        h_z: t.whiten_matrix(h_jac)?,
        d_r: t.d_r.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::reconstruct;

    #[test]
    fn diagonal_noise_is_untouched() {
        let r = Matrix::from_diagonal(&[0.5, 2.0, 3.0]);
        let t = build_decorrelation(&r, 0.0).unwrap();
        assert_eq!(t.u_r, UnitUpperTriangular::identity(3));
        assert_eq!(t.d_r.as_slice(), &[0.5, 2.0, 3.0]);

        let h = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let out = decorrelate(&t, &[1.0, 2.0, 3.0], &h).unwrap();
        assert_eq!(out.z, vec![1.0, 2.0, 3.0]);
        assert_eq!(out.h_z, h);
    }

    #[test]
    fn two_by_two_by_hand() {
        let r = Matrix::from_rows(&[[2.0, 1.0], [1.0, 1.0]]).unwrap();
        let t = build_decorrelation(&r, 0.0).unwrap();
        assert_eq!(t.u_r.get(0, 1), 1.0);
        assert_eq!(t.d_r.as_slice(), &[1.0, 1.0]);
        // z₂ = 1, z₁ = 3 − 1·1
        assert_eq!(t.whiten(&[3.0, 1.0]).unwrap(), vec![2.0, 1.0]);
    }

    #[test]
    fn equicorrelated_four() {
        let mut r = Matrix::identity(4);
        for i in 0..4 {
            for j in 0..4 {
                r[(i, j)] += 0.1;
            }
        }
        let t = build_decorrelation(&r, 0.0).unwrap();
        assert!(reconstruct(&t.u_r, &t.d_r).unwrap().relative_distance(&r).unwrap() <= 1e-12);
    }

    #[test]
    fn rejects_non_positive_definite() {
        let r = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(
            build_decorrelation(&r, 1e-12),
            Err(Error::NotPositiveDefinite { index: 0, .. })
        ));
    }

    #[test]
    fn dimension_errors() {
        let t = build_decorrelation(&Matrix::identity(2), 0.0).unwrap();
        assert!(decorrelate(&t, &[1.0], &Matrix::zeros(2, 2)).is_err());
        assert!(decorrelate(&t, &[1.0, 2.0], &Matrix::zeros(3, 2)).is_err());
    }
}
