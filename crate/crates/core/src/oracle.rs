//! Conventional covariance-form EKF, used to check the UD filter.
//!
//! Propagation is `F P Fᵀ + G Q Gᵀ`; the update processes the whole
//! measurement vector at once with the full `R`. The Joseph form is the
//! default. The naive `(I − K H) P` form is kept for the stress comparison.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{check_finite, Error, Result};
use crate::filter::{Halt, StepInput};
use crate::matrix::Matrix;
use crate::models::{MeasurementModel, ProcessModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateForm {
    #[default]
    Joseph,
    /// `P ← (I − K H) P`, no symmetrization.
    Naive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseEstimate {
    pub x: Vec<f64>,
    pub p: Matrix,
    pub epoch: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseRun {
    pub trajectory: Vec<DenseEstimate>,
    pub halted: Option<Halt>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DenseEkf {
    pub form: UpdateForm,
}

pub(crate) fn to_nalgebra(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> Matrix {
    let mut out = Matrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(i, j)] = m[(i, j)];
        }
    }
    out
}

/// Smallest eigenvalue of the symmetric part of `p`.
pub fn min_eigenvalue(p: &Matrix) -> f64 {
    let a = to_nalgebra(p);
    let sym = (&a + a.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

impl DenseEkf {
    pub fn new(form: UpdateForm) -> Self {
        Self { form }
    }

    pub fn initialize(&self, x0: &[f64], p0: &Matrix) -> DenseEstimate {
        DenseEstimate {
            x: x0.to_vec(),
            p: p0.clone(),
            epoch: 0,
        }
    }

    pub fn time_update<P: ProcessModel + ?Sized>(
        &self,
        est: &DenseEstimate,
        model: &P,
        u: &[f64],
    ) -> Result<DenseEstimate> {
        let f = to_nalgebra(&model.jacobian_f(&est.x, u));
        let g = to_nalgebra(&model.jacobian_g(&est.x, u));
        let q = to_nalgebra(model.process_noise());
        let p = to_nalgebra(&est.p);
        if f.ncols() != p.nrows() || g.ncols() != q.nrows() || g.nrows() != p.nrows() {
            return Err(Error::DimensionMismatch {
                op: "dense time_update",
                left: (f.nrows(), f.ncols()),
                right: (g.nrows(), g.ncols()),
            });
        }
        let p_next = &f * &p * f.transpose() + &g * &q * g.transpose();
        let x = model.propagate(&est.x, u);
        check_finite("propagated state", &x)?;
        Ok(DenseEstimate {
            x,
            p: from_nalgebra(&p_next),
            epoch: est.epoch + 1,
        })
    }

    /// Batch update with the full measurement covariance.
    pub fn measurement_update<M: MeasurementModel + ?Sized>(
        &self,
        est: &DenseEstimate,
        model: &M,
        y: &[f64],
    ) -> Result<DenseEstimate> {
        let n = est.x.len();
        let h = to_nalgebra(&model.jacobian_h(&est.x));
        let r = to_nalgebra(model.noise_cov());
        let pred = model.predict(&est.x);
        if h.nrows() != y.len() || h.ncols() != n || r.nrows() != y.len() || pred.len() != y.len() {
            return Err(Error::DimensionMismatch {
                op: "dense measurement_update",
                left: (h.nrows(), h.ncols()),
                right: (y.len(), n),
            });
        }
        let p = to_nalgebra(&est.p);
        let s = &h * &p * h.transpose() + &r;
        let s_inv = s.try_inverse().ok_or(Error::SingularInnovation)?;
        let k = &p * h.transpose() * s_inv;
        let innovation: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
        let dx = &k * nalgebra::DVector::from_column_slice(&innovation);
        let x: Vec<f64> = est.x.iter().zip(dx.iter()).map(|(a, b)| a + b).collect();

        let i_kh = DMatrix::identity(n, n) - &k * &h;
        let p_post = match self.form {
            UpdateForm::Joseph => &i_kh * &p * i_kh.transpose() + &k * &r * k.transpose(),
            UpdateForm::Naive => &i_kh * &p,
        };
        Ok(DenseEstimate {
            x,
            p: from_nalgebra(&p_post),
            epoch: est.epoch,
        })
    }

    pub fn run<P, M>(&self, init: &DenseEstimate, process: &P, meas: &M, inputs: &[StepInput]) -> DenseRun
    where
        P: ProcessModel + ?Sized,
        M: MeasurementModel + ?Sized,
    {
        let mut trajectory = vec![init.clone()];
        let mut halted = None;
        for step in inputs {
            let current = trajectory.last().expect("seeded with init");
            let epoch = current.epoch + 1;
            let result = self
                .time_update(current, process, &step.u)
                .and_then(|prior| match &step.y {
                    Some(y) => self.measurement_update(&prior, meas, y),
                    None => Ok(prior),
                });
            match result {
                Ok(est) => trajectory.push(est),
                Err(error) => {
                    halted = Some(Halt { epoch, error });
                    break;
                }
            }
        }
        DenseRun { trajectory, halted }
    }
}
