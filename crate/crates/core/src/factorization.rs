//! UD decomposition `M = U D Uᵀ` of a symmetric positive (semi-)definite
//! matrix. The recursion runs from the last column to the first and is free
//! of root extractions, matching the rest of the filter.

use crate::error::{Error, Result};
use crate::matrix::{reconstruct, DiagonalVector, Matrix, UnitUpperTriangular};

/// Tolerances for [`udu_decompose_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorTolerances {
    /// Allowed asymmetry relative to the largest absolute entry.
    pub symmetry: f64,
    /// Pivot threshold relative to the largest diagonal entry.
    pub pivot: f64,
}

impl Default for FactorTolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-9,
            pivot: 1e-13,
        }
    }
}

/// Unit upper-triangular `U` and diagonal `D` with `P = U D Uᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct UdFactors {
    pub u: UnitUpperTriangular,
    pub d: DiagonalVector,
}

impl UdFactors {
    pub fn new(u: UnitUpperTriangular, d: DiagonalVector) -> Result<Self> {
        if u.dim() != d.dim() {
            return Err(Error::DimensionMismatch {
                op: "UdFactors::new",
                left: (u.dim(), u.dim()),
                right: (d.dim(), 1),
            });
        }
        Ok(Self { u, d })
    }

    /// `U = I`, `D = diag`.
    pub fn diagonal(diag: Vec<f64>) -> Self {
        Self {
            u: UnitUpperTriangular::identity(diag.len()),
            d: DiagonalVector::new(diag),
        }
    }

    pub fn dim(&self) -> usize {
        self.d.dim()
    }

    /// The covariance `U D Uᵀ`.
    pub fn covariance(&self) -> Matrix {
        reconstruct(&self.u, &self.d).expect("factor dimensions agree by construction")
    }

    /// Trace of `U D Uᵀ` without forming it.
    pub fn trace(&self) -> f64 {
        (0..self.dim())
            .map(|k| self.d[k] * (0..=k).map(|i| self.u.get(i, k).powi(2)).sum::<f64>())
            .sum()
    }
}

/// Outcome of the sign check on `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCheck {
    pub psd: bool,
    pub first_negative: Option<usize>,
}

/// The covariance is positive semi-definite exactly when no `D` entry is negative.
pub fn is_psd(f: &UdFactors) -> PsdCheck {
    let first_negative = f.d.first_negative().map(|(i, _)| i);
    PsdCheck {
        psd: first_negative.is_none(),
        first_negative,
    }
}

/// [`udu_decompose_with`] using default tolerances.
pub fn udu_decompose(m: &Matrix) -> Result<UdFactors> {
    udu_decompose_with(m, FactorTolerances::default())
}

/// Factors `m = U D Uᵀ`.
///
/// Column `j` runs from last to first; within it row `i` runs from `j` up to
/// the first row, subtracting the contributions of the columns already
/// finished to the right. A pivot at or below the threshold is accepted only
/// when every entry above it is also negligible; that column of `U` is then
/// zeroed, which covers rank-deficient inputs.
pub fn udu_decompose_with(m: &Matrix, tol: FactorTolerances) -> Result<UdFactors> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let limit = tol.symmetry * m.max_abs();
    let asymmetry = m.max_asymmetry();
    if asymmetry > limit {
        return Err(Error::NotSymmetric { asymmetry, limit });
    }

    let n = m.rows();
    let max_diag = m.diagonal().iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let tol_pivot = tol.pivot * max_diag;

    let mut u = UnitUpperTriangular::identity(n);
    let mut d = vec![0.0; n];
    for j in (0..n).rev() {
        for i in (0..=j).rev() {
            let mut sigma = m[(i, j)];
            for k in j + 1..n {
                sigma -= u.get(i, k) * d[k] * u.get(j, k);
            }
            if i == j {
                d[j] = sigma;
            } else if d[j] > tol_pivot {
                u.set(i, j, sigma / d[j]);
            } else if sigma.abs() <= tol_pivot {
                u.set(i, j, 0.0);
            } else {
                return Err(Error::SingularPivot {
                    index: j,
                    pivot: d[j],
                    tol: tol_pivot,
                });
            }
        }
    }
    Ok(UdFactors {
        u,
        d: DiagonalVector::new(d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn identity_and_diagonal() {
        let f = udu_decompose(&Matrix::identity(3)).unwrap();
        assert_eq!(f.u, UnitUpperTriangular::identity(3));
        assert_eq!(f.d.as_slice(), &[1.0, 1.0, 1.0]);

        let f = udu_decompose(&Matrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert_eq!(f.u, UnitUpperTriangular::identity(2));
        assert_eq!(f.d.as_slice(), &[4.0, 9.0]);
    }

    #[test]
    fn two_by_two_by_hand() {
        // d2 = P22, u12 = P12 / P22, d1 = P11 - u12^2 d2
        let p = Matrix::from_rows(&[[2.0, 1.0], [1.0, 1.0]]).unwrap();
        let f = udu_decompose(&p).unwrap();
        assert_eq!(f.u.get(0, 1), 1.0);
        assert_eq!(f.d.as_slice(), &[1.0, 1.0]);
        assert_eq!(f.covariance(), p);
    }

    #[test]
    fn seeded_spd_eight() {
        let mut g = SplitMix64::new(8);
        let p = g.random_spd(8);
        let f = udu_decompose(&p).unwrap();
        assert!(f.covariance().relative_distance(&p).unwrap() <= 1e-12);
        assert!(is_psd(&f).psd);
    }

    #[test]
    fn rejects_asymmetric_and_non_square() {
        let p = Matrix::from_rows(&[[2.0, 1.0], [0.5, 1.0]]).unwrap();
        assert!(matches!(udu_decompose(&p), Err(Error::NotSymmetric { .. })));
        assert!(matches!(
            udu_decompose(&Matrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn semidefinite_zero_column_is_accepted() {
        // Rank one: [1 1; 1 1] has zero pivot once the last column is removed,
        // and diag(1, 0) has a zero last pivot with a zero column above.
        let p = Matrix::from_diagonal(&[1.0, 0.0]);
        let f = udu_decompose(&p).unwrap();
        assert_eq!(f.d.as_slice(), &[1.0, 0.0]);
        assert_eq!(f.u.get(0, 1), 0.0);

        let p = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let f = udu_decompose(&p).unwrap();
        assert_eq!(f.d.as_slice(), &[0.0, 1.0]);
        assert_eq!(f.covariance(), p);

        let f = udu_decompose(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(f.d.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn indefinite_pivot_is_rejected() {
        // Last pivot is zero but the entry above it is not.
        let p = Matrix::from_rows(&[[1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(udu_decompose(&p), Err(Error::SingularPivot { index: 1, .. })));
    }

    #[test]
    fn psd_flag_examples() {
        assert!(is_psd(&UdFactors::diagonal(vec![1.0, 2.0, 3.0])).psd);
        let check = is_psd(&UdFactors::diagonal(vec![1.0, -1e-30, 3.0]));
        assert!(!check.psd);
        // zero-based position of the second entry
        assert_eq!(check.first_negative, Some(1));
        assert!(is_psd(&UdFactors::diagonal(vec![0.0, 0.0])).psd);
    }

    #[test]
    fn trace_matches_reconstruction() {
        let mut g = SplitMix64::new(5);
        let p = g.random_spd(5);
        let f = udu_decompose(&p).unwrap();
        let tr: f64 = p.diagonal().iter().sum();
        assert!((f.trace() - tr).abs() <= 1e-12 * tr);
    }
}
