//! Dense row-major matrices plus the two structured types the UD filter
//! works with: a unit upper-triangular factor stored in packed form and the
//! diagonal of `D`.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{check_finite, Error, Result};

/// Dense row-major matrix of `f64`.
///
/// Zero-sized dimensions are permitted so that a system with no process
/// noise channels can carry an `n x 0` noise map.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data, rejecting NaN and infinities.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "Matrix::new",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        check_finite("Matrix::new", &data)?;
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of rows. All rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    op: "Matrix::from_rows",
                    left: (rows.len(), cols),
                    right: (1, row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Single-column matrix holding `v`.
    pub fn column(v: &[f64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column_vec(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Matrix product `self * rhs`.
    pub fn mat_mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                op: "mat_mul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = rhs.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                op: "mul_vec",
                left: self.shape(),
                right: (v.len(), 1),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with("add", rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with("sub", rhs, |a, b| a - b)
    }

    fn zip_with(&self, op: &'static str, rhs: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Largest `|m[i][j] - m[j][i]|` over the matrix. Square matrices only.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// `‖self − other‖_F / ‖other‖_F`, falling back to the absolute norm when
    /// `other` is zero.
    pub fn relative_distance(&self, other: &Matrix) -> Result<f64> {
        let diff = self.sub(other)?.frobenius_norm();
        let scale = other.frobenius_norm();
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }

    /// Copies `block` into `self` with its top-left corner at `(row, col)`.
    pub fn set_block(&mut self, row: usize, col: usize, block: &Matrix) {
        assert!(row + block.rows <= self.rows && col + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(row + i, col + j)] = block[(i, j)];
            }
        }
    }

    /// Whether any off-diagonal entry exceeds `rel * max|diag|`.
    pub fn has_off_diagonal(&self, rel: f64) -> bool {
        let scale = self.diagonal().iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let limit = rel * scale;
        (0..self.rows).any(|i| (0..self.cols).any(|j| i != j && self[(i, j)].abs() > limit))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// One row per line, entries right-aligned. Honors the formatter's
/// precision, defaulting to 6 digits.
impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = f.precision().unwrap_or(6);
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|v| format!("{v:>12.prec$}")).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Free-function form of [`Matrix::mat_mul`].
pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.mat_mul(b)
}

/// Unit upper-triangular matrix. Only the strict upper triangle is stored,
/// packed row by row; the unit diagonal and zero lower triangle are implied.
#[derive(Clone, PartialEq)]
pub struct UnitUpperTriangular {
    dim: usize,
    upper: Vec<f64>,
}

impl UnitUpperTriangular {
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            upper: vec![0.0; dim * dim.saturating_sub(1) / 2],
        }
    }

    /// Reads the strict upper triangle of `m`. Entries on and below the
    /// diagonal must already be 1 and 0 respectively.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let n = m.rows();
        let mut u = Self::identity(n);
        for i in 0..n {
            for j in 0..n {
                let expected = match i.cmp(&j) {
                    std::cmp::Ordering::Less => {
                        u.set(i, j, m[(i, j)]);
                        continue;
                    }
                    std::cmp::Ordering::Equal => 1.0,
                    std::cmp::Ordering::Greater => 0.0,
                };
                if m[(i, j)] != expected {
                    return Err(Error::DimensionMismatch {
                        op: "UnitUpperTriangular::from_matrix (structure)",
                        left: (i, j),
                        right: m.shape(),
                    });
                }
            }
        }
        Ok(u)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.dim);
        i * self.dim - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Logical entry `(i, j)`: 1 on the diagonal, 0 below it.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.upper[self.offset(i, j)],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Greater => 0.0,
        }
    }

    /// Sets a strict-upper entry.
    ///
    /// # Panics
    ///
    /// If `i >= j`; the diagonal and lower triangle are fixed.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(
            i < j,
            "UnitUpperTriangular::set({i}, {j}) outside strict upper triangle"
        );
        let k = self.offset(i, j);
        self.upper[k] = value;
    }

    /// Packed strict-upper entries, row by row.
    pub fn packed(&self) -> &[f64] {
        &self.upper
    }

    pub fn to_matrix(&self) -> Matrix {
        let n = self.dim;
        let mut m = Matrix::identity(n);
        for i in 0..n {
            for j in i + 1..n {
                m[(i, j)] = self.get(i, j);
            }
        }
        m
    }

    /// Product of two unit upper-triangular matrices, itself unit upper triangular.
    pub fn mul(&self, rhs: &UnitUpperTriangular) -> Result<UnitUpperTriangular> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                op: "UnitUpperTriangular::mul",
                left: (self.dim, self.dim),
                right: (rhs.dim, rhs.dim),
            });
        }
        let n = self.dim;
        let mut out = Self::identity(n);
        for i in 0..n {
            for j in i + 1..n {
                let s: f64 = (i..=j).map(|k| self.get(i, k) * rhs.get(k, j)).sum();
                out.set(i, j, s);
            }
        }
        Ok(out)
    }

    /// `Uᵀ v`.
    pub fn transpose_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|j| v[j] + (0..j).map(|i| self.get(i, j) * v[i]).sum::<f64>())
            .collect()
    }

    /// `U v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| v[i] + (i + 1..self.dim).map(|j| self.get(i, j) * v[j]).sum::<f64>())
            .collect()
    }

    /// `M U` for a dense `M` with `dim` columns.
    pub fn left_mul(&self, m: &Matrix) -> Result<Matrix> {
        if m.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                op: "UnitUpperTriangular::left_mul",
                left: m.shape(),
                right: (self.dim, self.dim),
            });
        }
        let mut out = Matrix::zeros(m.rows(), self.dim);
        for r in 0..m.rows() {
            let row = m.row(r);
            for j in 0..self.dim {
                out[(r, j)] = row[j] + (0..j).map(|k| row[k] * self.get(k, j)).sum::<f64>();
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for UnitUpperTriangular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnitUpperTriangular{:?}", self.to_matrix())
    }
}

/// Diagonal entries of `D`. Stored as-is; the filter never takes square roots.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalVector(Vec<f64>);

impl DiagonalVector {
    pub fn new(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Index and value of the first strictly negative entry.
    pub fn first_negative(&self) -> Option<(usize, f64)> {
        self.0.iter().copied().enumerate().find(|&(_, d)| d < 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.first_negative().is_none()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

impl Index<usize> for DiagonalVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for DiagonalVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<Vec<f64>> for DiagonalVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// `U D Uᵀ`, computed on the upper triangle and mirrored so the result is
/// exactly symmetric.
pub fn reconstruct(u: &UnitUpperTriangular, d: &DiagonalVector) -> Result<Matrix> {
    if u.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            op: "reconstruct",
            left: (u.dim(), u.dim()),
            right: (d.dim(), 1),
        });
    }
    let n = u.dim();
    let mut p = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (j..n).map(|k| u.get(i, k) * d[k] * u.get(j, k)).sum();
            p[(i, j)] = s;
            p[(j, i)] = s;
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_product(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                for k in 0..a.cols() {
                    out[(i, j)] += a[(i, k)] * b[(k, j)];
                }
            }
        }
        out
    }

    #[test]
    fn identity_products() {
        let i2 = Matrix::identity(2);
        assert_eq!(mat_mul(&i2, &i2).unwrap(), i2);
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(mat_mul(&a, &i2).unwrap(), a);
    }

    #[test]
    fn hand_product_matches_triple_loop() {
        let a = Matrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        let b = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]).unwrap();
        let expected = Matrix::from_rows(&[[2.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(brute_force_product(&a, &b), expected);
        assert_eq!(mat_mul(&a, &b).unwrap(), expected);
    }

    #[test]
    fn product_dimension_error_names_shapes() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 3);
        let err = mat_mul(&a, &b).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                op: "mat_mul",
                left: (2, 3),
                right: (2, 3)
            }
        );
        assert!(err.to_string().contains("(2, 3)"));
    }

    #[test]
    fn rejects_non_finite_input() {
        assert!(matches!(
            Matrix::from_rows(&[[1.0, f64::NAN]]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(Matrix::new(1, 1, vec![f64::INFINITY]).is_err());
        assert!(Matrix::new(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn reconstruct_examples() {
        let i2 = UnitUpperTriangular::identity(2);
        assert_eq!(reconstruct(&i2, &vec![1.0, 1.0].into()).unwrap(), Matrix::identity(2));
        assert_eq!(
            reconstruct(&i2, &vec![3.0, 5.0].into()).unwrap(),
            Matrix::from_diagonal(&[3.0, 5.0])
        );
        let mut u = UnitUpperTriangular::identity(2);
        u.set(0, 1, 1.0);
        assert_eq!(
            reconstruct(&u, &vec![1.0, 1.0].into()).unwrap(),
            Matrix::from_rows(&[[2.0, 1.0], [1.0, 1.0]]).unwrap()
        );
        assert!(reconstruct(&u, &vec![1.0].into()).is_err());
    }

    #[test]
    fn packed_storage_layout() {
        let mut u = UnitUpperTriangular::identity(4);
        let mut next = 1.0;
        for i in 0..4 {
            for j in i + 1..4 {
                u.set(i, j, next);
                next += 1.0;
            }
        }
        assert_eq!(u.packed(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(u.get(2, 2), 1.0);
        assert_eq!(u.get(3, 1), 0.0);
        assert_eq!(UnitUpperTriangular::from_matrix(&u.to_matrix()).unwrap(), u);
    }

    #[test]
    #[should_panic]
    fn cannot_write_diagonal() {
        UnitUpperTriangular::identity(3).set(1, 1, 2.0);
    }

    #[test]
    fn from_matrix_rejects_broken_structure() {
        let m = Matrix::from_rows(&[[2.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(UnitUpperTriangular::from_matrix(&m).is_err());
        let m = Matrix::from_rows(&[[1.0, 1.0], [0.5, 1.0]]).unwrap();
        assert!(UnitUpperTriangular::from_matrix(&m).is_err());
    }

    #[test]
    fn structured_products_match_dense() {
        let mut a = UnitUpperTriangular::identity(3);
        a.set(0, 1, 0.5);
        a.set(0, 2, -2.0);
        a.set(1, 2, 3.0);
        let mut b = UnitUpperTriangular::identity(3);
        b.set(0, 1, 1.5);
        b.set(1, 2, -1.0);
        let dense = mat_mul(&a.to_matrix(), &b.to_matrix()).unwrap();
        assert_eq!(a.mul(&b).unwrap().to_matrix(), dense);

        let v = [1.0, -2.0, 0.25];
        assert_eq!(a.mul_vec(&v), a.to_matrix().mul_vec(&v).unwrap());
        assert_eq!(a.transpose_mul_vec(&v), a.to_matrix().transpose().mul_vec(&v).unwrap());

        let m = Matrix::from_rows(&[[1.0, 2.0, 3.0], [-1.0, 0.0, 4.0]]).unwrap();
        assert_eq!(a.left_mul(&m).unwrap(), mat_mul(&m, &a.to_matrix()).unwrap());
    }

    #[test]
    fn diagonal_sign_queries() {
        let d = DiagonalVector::new(vec![1.0, -1e-30, 3.0]);
        assert_eq!(d.first_negative(), Some((1, -1e-30)));
        assert!(DiagonalVector::new(vec![0.0, 0.0]).is_nonnegative());
    }

    #[test]
    fn off_diagonal_detection() {
        let mut r = Matrix::from_diagonal(&[2.0, 3.0]);
        assert!(!r.has_off_diagonal(1e-12));
        r[(0, 1)] = 1e-13;
        assert!(!r.has_off_diagonal(1e-12));
        r[(0, 1)] = 0.1;
        assert!(r.has_off_diagonal(1e-12));
    }
}
