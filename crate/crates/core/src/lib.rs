//! UD-factorized extended Kalman filtering.
//!
//! The covariance is carried as `P = U D Uᵀ` with `U` unit upper triangular
//! and `D` diagonal. Propagation orthogonalizes `[F U | G]` under the weights
//! `diag(D, Q)` (weighted modified Gram-Schmidt); measurements are absorbed
//! one scalar at a time with the modified Agee-Turner rank-one downdate.
//! Neither step takes a square root, and positive semi-definiteness can be
//! read directly off the signs of `D`.
//!
//! ```
//! use udkf::{initialize, LinearMeasurement, Matrix, UdFilter};
//! use udkf::models::constant_velocity_1d;
//!
//! let process = constant_velocity_1d(0.1, 0.01);
//! let sensor = LinearMeasurement::new(
//!     Matrix::from_rows(&[[1.0, 0.0]]).unwrap(),
//!     Matrix::from_diagonal(&[0.25]),
//! );
//! let mut filter = UdFilter::default();
//! let est = initialize(&[0.0, 1.0], &Matrix::identity(2)).unwrap();
//! let (prior, _) = filter.time_update(&est, &process, &[]).unwrap();
//! let (post, diag) = filter.measurement_update(&prior, &sensor, &[0.12]).unwrap();
//! assert!(post.factors.d.is_nonnegative());
//! assert_eq!(diag.innovations.len(), 1);
//! ```

// NaN-rejecting guards are written as `!(x > tol)`, and the kernels index
// several arrays with the same loop variable.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod decorrelation;
pub mod error;
pub mod factorization;
pub mod filter;
pub mod matrix;
pub mod models;
pub mod oracle;
pub mod propagation;
pub mod rng;
pub mod scenario;
pub mod selftest;
pub mod stress;
pub mod update;

pub use decorrelation::{build_decorrelation, decorrelate, DecorrelationTransform};
pub use error::{Error, Result};
pub use factorization::{is_psd, udu_decompose, udu_decompose_with, FactorTolerances, UdFactors};
pub use filter::{initialize, FilterConfig, FilterDiagnostics, Relinearization, StateEstimate, StepInput, UdFilter};
pub use matrix::{mat_mul, reconstruct, DiagonalVector, Matrix, UnitUpperTriangular};
pub use models::{LinearMeasurement, LinearProcess, MeasurementModel, ProcessModel};
pub use oracle::{DenseEkf, DenseEstimate, UpdateForm};
pub use propagation::{build_candidate, propagate_factors, PropagationInputs, WmgsWorkspace};
pub use update::{
    direct_ud_update, modified_agee_turner, standard_agee_turner, RankOneInputs, ScalarMeasurement, ScalarUpdateResult,
};
