//! Portable seeded noise source.
//!
//! Uniforms come from SplitMix64 (Steele, Lea and Flood) with the top 53 bits
//! scaled by 2⁻⁵³. Normal deviates use the Box-Muller transform on pairs of
//! uniforms `(u1, u2)` with `u1` mapped into `(0, 1]` as `1 - u`, returning
//! `r cos θ` first and caching `r sin θ` for the next call. Any language with
//! 64-bit wrapping arithmetic and IEEE doubles reproduces the stream exactly.

use crate::matrix::{dot, Matrix};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    spare: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal deviate.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.normal();
            }
        }
        m
    }

    pub fn uniform_matrix(&mut self, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.uniform_in(lo, hi);
            }
        }
        m
    }

    /// `A Aᵀ + I` for a Gaussian `A`.
    pub fn random_spd(&mut self, n: usize) -> Matrix {
        let a = self.gaussian_matrix(n, n);
        let mut p = a.mat_mul(&a.transpose()).expect("square");
        for i in 0..n {
            p[(i, i)] += 1.0;
        }
        symmetrize(&p)
    }

    /// Random orthogonal matrix from Gram-Schmidt on Gaussian columns.
    pub fn random_orthogonal(&mut self, n: usize) -> Matrix {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        while cols.len() < n {
            let mut c = self.normal_vec(n);
            for _ in 0..2 {
                for q in &cols {
                    let p = dot(&c, q);
                    c.iter_mut().zip(q).for_each(|(ci, qi)| *ci -= p * qi);
                }
            }
            let norm = dot(&c, &c).sqrt();
            if norm > 1e-8 {
                c.iter_mut().for_each(|ci| *ci /= norm);
                cols.push(c);
            }
        }
        let mut q = Matrix::zeros(n, n);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                q[(i, j)] = c[i];
            }
        }
        q
    }

    /// Symmetric positive definite matrix with eigenvalues log-spaced from 1
    /// down to `1 / condition`.
    pub fn spd_with_condition(&mut self, n: usize, condition: f64) -> Matrix {
        let q = self.random_orthogonal(n);
        let eig: Vec<f64> = (0..n)
            .map(|i| {
                let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
                condition.powf(-t)
            })
            .collect();
        let p = q
            .mat_mul(&Matrix::from_diagonal(&eig))
            .and_then(|qd| qd.mat_mul(&q.transpose()))
            .expect("square");
        symmetrize(&p)
    }
}

/// `(M + Mᵀ) / 2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    let mut s = m.clone();
    for i in 0..m.rows() {
        for j in i + 1..m.cols() {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            s[(i, j)] = avg;
            s[(j, i)] = avg;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_stream() {
        // Published SplitMix64 outputs for seed 1234567.
        let mut g = SplitMix64::new(1234567);
        let expected = [
            6457827717110365317u64,
            3203168211198807973,
            9817491932198370423,
            4593380528125082431,
            16408922859458223821,
        ];
        for e in expected {
            assert_eq!(g.next_u64(), e);
        }
    }

    #[test]
    fn normal_moments() {
        let mut g = SplitMix64::new(9);
        let n = 200_000;
        let xs = g.normal_vec(n);
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "{mean}");
        assert!((var - 1.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut g = SplitMix64::new(3);
        let q = g.random_orthogonal(6);
        let qtq = q.transpose().mat_mul(&q).unwrap();
        assert!(qtq.relative_distance(&Matrix::identity(6)).unwrap() < 1e-13);
    }
}
