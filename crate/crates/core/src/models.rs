//! Process and measurement model interfaces, with a few ready-made models.

use crate::matrix::Matrix;

/// Discrete dynamics `x_k = f(x_{k-1}, u_{k-1}, w_{k-1})`, `w ~ N(0, Q)`.
///
/// `propagate` evaluates `f` with the noise at its zero mean. Both Jacobians
/// are evaluated at the posterior state of the previous epoch.
pub trait ProcessModel {
    fn propagate(&self, x: &[f64], u: &[f64]) -> Vec<f64>;
    /// `F = ∂f/∂x`, `n x n`.
    fn jacobian_f(&self, x: &[f64], u: &[f64]) -> Matrix;
    /// `G = ∂f/∂w`, `n x q`.
    fn jacobian_g(&self, x: &[f64], u: &[f64]) -> Matrix;
    /// `Q`, `q x q`.
    fn process_noise(&self) -> &Matrix;
}

/// Measurement `ỹ = h(x) + v`, `v ~ N(0, R)`.
pub trait MeasurementModel {
    fn predict(&self, x: &[f64]) -> Vec<f64>;
    /// `H = ∂h/∂x`, `m x n`.
    fn jacobian_h(&self, x: &[f64]) -> Matrix;
    /// `R`, `m x m`, diagonal or correlated.
    fn noise_cov(&self) -> &Matrix;
}

/// `x_k = F x_{k-1} + B u_{k-1} + G w_{k-1}`.
#[derive(Debug, Clone)]
pub struct LinearProcess {
    pub f: Matrix,
    pub g: Matrix,
    pub q: Matrix,
    /// Input matrix; `None` means the system has no inputs.
    pub b: Option<Matrix>,
}

impl LinearProcess {
    pub fn new(f: Matrix, g: Matrix, q: Matrix) -> Self {
        Self { f, g, q, b: None }
    }

    pub fn with_input(mut self, b: Matrix) -> Self {
        self.b = Some(b);
        self
    }
}

impl ProcessModel for LinearProcess {
    fn propagate(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let mut next = self.f.mul_vec(x).expect("F conforms to state");
        if let Some(b) = &self.b {
            let bu = b.mul_vec(u).expect("B conforms to input");
            next.iter_mut().zip(bu).for_each(|(a, b)| *a += b);
        }
        next
    }

    fn jacobian_f(&self, _x: &[f64], _u: &[f64]) -> Matrix {
        self.f.clone()
    }

    fn jacobian_g(&self, _x: &[f64], _u: &[f64]) -> Matrix {
        self.g.clone()
    }

    fn process_noise(&self) -> &Matrix {
        &self.q
    }
}

/// `ỹ = H x + v`.
#[derive(Debug, Clone)]
pub struct LinearMeasurement {
    pub h: Matrix,
    pub r: Matrix,
}

impl LinearMeasurement {
    pub fn new(h: Matrix, r: Matrix) -> Self {
        Self { h, r }
    }
}

impl MeasurementModel for LinearMeasurement {
    fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.h.mul_vec(x).expect("H conforms to state")
    }

    fn jacobian_h(&self, _x: &[f64]) -> Matrix {
        self.h.clone()
    }

    fn noise_cov(&self) -> &Matrix {
        &self.r
    }
}

/// Transition and noise map of a 1-D constant-velocity model, state `(p, v)`,
/// driven by white acceleration.
pub fn constant_velocity_1d(dt: f64, accel_var: f64) -> LinearProcess {
    let f = Matrix::from_rows(&[[1.0, dt], [0.0, 1.0]]).expect("finite");
    let g = Matrix::from_rows(&[[0.5 * dt * dt], [dt]]).expect("finite");
    LinearProcess::new(f, g, Matrix::from_diagonal(&[accel_var]))
}

/// 2-D constant-velocity model, state `(px, py, vx, vy)`, with independent
/// white accelerations on each axis.
pub fn constant_velocity_2d(dt: f64, q: Matrix) -> LinearProcess {
    let h = 0.5 * dt * dt;
    let f = Matrix::from_rows(&[
        [1.0, 0.0, dt, 0.0],
        [0.0, 1.0, 0.0, dt],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    .expect("finite");
    let g = Matrix::from_rows(&[[h, 0.0], [0.0, h], [dt, 0.0], [0.0, dt]]).expect("finite");
    LinearProcess::new(f, g, q)
}

/// Range and bearing to a planar target from a sensor at the origin.
/// The state starts with `(px, py)`; trailing components are unobserved.
#[derive(Debug, Clone)]
pub struct RangeBearing {
    pub state_dim: usize,
    pub r: Matrix,
}

impl MeasurementModel for RangeBearing {
    fn predict(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0].hypot(x[1]), x[1].atan2(x[0])]
    }

    fn jacobian_h(&self, x: &[f64]) -> Matrix {
        let (px, py) = (x[0], x[1]);
        let r2 = px * px + py * py;
        let r = r2.sqrt();
        let mut h = Matrix::zeros(2, self.state_dim);
        h[(0, 0)] = px / r;
        h[(0, 1)] = py / r;
        h[(1, 0)] = -py / r2;
        h[(1, 1)] = px / r2;
        h
    }

    fn noise_cov(&self) -> &Matrix {
        &self.r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_bearing_jacobian_matches_finite_differences() {
        let model = RangeBearing {
            state_dim: 4,
            r: Matrix::identity(2),
        };
        let x = [30.0, -12.0, 1.0, 2.0];
        let h = model.jacobian_h(&x);
        let eps = 1e-6;
        for j in 0..4 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += eps;
            xm[j] -= eps;
            let (yp, ym) = (model.predict(&xp), model.predict(&xm));
            for i in 0..2 {
                let fd = (yp[i] - ym[i]) / (2.0 * eps);
                assert!((fd - h[(i, j)]).abs() < 1e-8, "({i},{j}) {fd} vs {}", h[(i, j)]);
            }
        }
    }

    #[test]
    fn linear_process_with_input() {
        let p = LinearProcess::new(Matrix::identity(2), Matrix::zeros(2, 0), Matrix::zeros(0, 0))
            .with_input(Matrix::from_rows(&[[1.0], [2.0]]).unwrap());
        assert_eq!(p.propagate(&[1.0, 1.0], &[0.5]), vec![1.5, 2.0]);
    }
}
