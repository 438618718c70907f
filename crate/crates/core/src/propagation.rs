//! Time update of the UD factors by weighted modified Gram-Schmidt.
//!
//! The propagated covariance `F U⁺ D⁺ U⁺ᵀ Fᵀ + G Q Gᵀ` is first written as
//! `W D̂ Wᵀ` with `W = [F U⁺ | G]` and `D̂ = diag(D⁺, Q)`. Orthogonalizing the
//! rows of `W` under the weights `D̂`, last row first, yields `W = Ū V` with
//! `V D̂ Vᵀ` diagonal, so the new factors are `Ū` and `D̄ = V D̂ Vᵀ`.

use crate::error::{Error, Result};
use crate::factorization::{udu_decompose, UdFactors};
use crate::matrix::{DiagonalVector, Matrix, UnitUpperTriangular};

/// Off-diagonal entries of `Q` above this fraction of its largest diagonal
/// entry make it "correlated".
const Q_OFF_DIAGONAL_REL: f64 = 1e-12;

/// Inputs for one covariance propagation step.
#[derive(Debug, Clone)]
pub struct PropagationInputs<'a> {
    /// State transition Jacobian `F`, `n x n`.
    pub f_jac: &'a Matrix,
    /// Noise map `G`, `n x q`.
    pub g_map: &'a Matrix,
    /// Process noise covariance `Q`, `q x q`.
    pub q_cov: &'a Matrix,
    /// Posterior factors from the last update.
    pub prior: &'a UdFactors,
}

/// A direction whose weighted norm collapsed during orthogonalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateDirection {
    /// Row whose weighted norm fell below tolerance.
    pub index: usize,
    pub weighted_norm: f64,
}

/// Rows of the candidate factor `W`, the weights `D̂`, and after
/// [`WmgsWorkspace::orthogonalize`] the orthogonal rows `V` and coefficients.
#[derive(Debug, Clone)]
pub struct WmgsWorkspace {
    pub w_rows: Matrix,
    pub d_hat: DiagonalVector,
    pub v_rows: Matrix,
    pub u_out: UnitUpperTriangular,
}

/// Factors produced by WMGS along with any collapsed directions.
#[derive(Debug, Clone)]
pub struct WmgsOutcome {
    pub factors: UdFactors,
    pub degenerate: Vec<DegenerateDirection>,
}

/// Assembles `W = [F U⁺ | G]` and `D̂ = diag(D⁺, Q)`.
///
/// A `Q` with off-diagonal terms is first factored as `U_q D_q U_qᵀ` and
/// folded in as `G ← G U_q`, `Q ← D_q`.
pub fn build_candidate(inputs: &PropagationInputs<'_>) -> Result<WmgsWorkspace> {
    let n = inputs.prior.dim();
    let (f, g, q) = (inputs.f_jac, inputs.g_map, inputs.q_cov);
    if f.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            op: "build_candidate: F vs prior factors",
            left: f.shape(),
            right: (n, n),
        });
    }
    if g.rows() != n || q.shape() != (g.cols(), g.cols()) {
        return Err(Error::DimensionMismatch {
            op: "build_candidate: G vs Q",
            left: g.shape(),
            right: q.shape(),
        });
    }

    let (g_eff, q_diag) = if q.has_off_diagonal(Q_OFF_DIAGONAL_REL) {
        let qf = udu_decompose(q)?;
        (qf.u.left_mul(g)?, qf.d.into_vec())
    } else {
        (g.clone(), q.diagonal())
    };
    if let Some(index) = q_diag.iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeWeight {
            what: "process noise",
            index,
            value: q_diag[index],
        });
    }

    let nq = q_diag.len();
    let mut w = Matrix::zeros(n, n + nq);
    w.set_block(0, 0, &inputs.prior.u.left_mul(f)?);
    w.set_block(0, n, &g_eff);

    let mut d_hat = inputs.prior.d.as_slice().to_vec();
    d_hat.extend_from_slice(&q_diag);

    Ok(WmgsWorkspace {
        v_rows: Matrix::zeros(n, n + nq),
        u_out: UnitUpperTriangular::identity(n),
        w_rows: w,
        d_hat: DiagonalVector::new(d_hat),
    })
}

impl WmgsWorkspace {
    /// Default collapse threshold: `1e-13 · max(D̂)`.
    pub fn default_tolerance(&self) -> f64 {
        1e-13 * self.d_hat.max()
    }

    fn weighted_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(self.d_hat.as_slice())
            .map(|((x, y), w)| x * w * y)
            .sum()
    }

    /// Runs the weighted orthogonalization and returns `(Ū, D̄)`.
    ///
    /// Rows are finalized from last to first. Each row starts as `w_k` and
    /// has its projection onto every finished `v_j` (`j > k`) removed in
    /// turn, with the coefficient taken from the partially reduced row. In
    /// exact arithmetic this equals `w_k D̂ v_jᵀ / v_j D̂ v_jᵀ`.
    ///
    /// If a row loses more than half its weighted squared norm to the
    /// projections, the sweep is repeated once on the reduced row and the
    /// coefficients are accumulated, which restores orthogonality lost to
    /// cancellation.
    ///
    /// When `v_j D̂ v_jᵀ <= tol_orth`, every coefficient onto `v_j` is set to
    /// zero and `D̄_j` is clamped at zero; the event is reported rather than
    /// treated as fatal.
    pub fn orthogonalize(&mut self, tol_orth: f64) -> Result<WmgsOutcome> {
        if let Some((index, value)) = self.d_hat.first_negative() {
            return Err(Error::NegativeWeight {
                what: "WMGS weights",
                index,
                value,
            });
        }
        let n = self.w_rows.rows();
        let mut d_bar = vec![0.0; n];
        let mut degenerate = Vec::new();
        let mut collapsed = vec![false; n];
        self.u_out = UnitUpperTriangular::identity(n);

        for k in (0..n).rev() {
            let mut v = self.w_rows.row(k).to_vec();
            let mut coeffs = vec![0.0; n];
            let mut before = self.weighted_dot(&v, &v);
            let mut norm = before;
            for _pass in 0..2 {
                for j in (k + 1..n).rev() {
                    if collapsed[j] {
                        continue;
                    }
                    let vj = self.v_rows.row(j);
                    let coeff = self.weighted_dot(&v, vj) / d_bar[j];
                    v.iter_mut().zip(vj).for_each(|(a, b)| *a -= coeff * b);
                    coeffs[j] += coeff;
                }
                norm = self.weighted_dot(&v, &v);
                // Heavy cancellation leaves rounding noise along the finished
                // rows; one more sweep removes it.
                if norm >= 0.5 * before {
                    break;
                }
                before = norm;
            }
            for j in k + 1..n {
                self.u_out.set(k, j, coeffs[j]);
            }
            if norm <= tol_orth {
                collapsed[k] = true;
                degenerate.push(DegenerateDirection {
                    index: k,
                    weighted_norm: norm,
                });
            }
            d_bar[k] = norm.max(0.0);
            self.v_rows.row_mut(k).copy_from_slice(&v);
        }

        Ok(WmgsOutcome {
            factors: UdFactors {
                u: self.u_out.clone(),
                d: DiagonalVector::new(d_bar),
            },
            degenerate,
        })
    }

    /// Largest normalized weighted inner product between distinct `v` rows,
    /// `|v_k D̂ v_jᵀ| / (‖v_k‖ ‖v_j‖ max D̂)`.
    pub fn max_orthogonality_defect(&self) -> f64 {
        let n = self.v_rows.rows();
        let dmax = self.d_hat.max();
        let norms: Vec<f64> = (0..n)
            .map(|i| self.v_rows.row(i).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();
        let mut worst = 0.0_f64;
        for k in 0..n {
            for j in k + 1..n {
                let scale = norms[k] * norms[j] * dmax;
                if scale > 0.0 {
                    let ip = self.weighted_dot(self.v_rows.row(k), self.v_rows.row(j));
                    worst = worst.max(ip.abs() / scale);
                }
            }
        }
        worst
    }
}

/// Builds the candidate factors and orthogonalizes them with the default tolerance.
pub fn propagate_factors(inputs: &PropagationInputs<'_>) -> Result<WmgsOutcome> {
    let mut ws = build_candidate(inputs)?;
    let tol = ws.default_tolerance();
    ws.orthogonalize(tol)
}
