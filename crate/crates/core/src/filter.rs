//! The UD extended Kalman filter.
//!
//! Each epoch propagates the state through the process model and the
//! factors through WMGS, then folds in the measurement vector one scalar
//! component at a time with the modified Agee-Turner update. Correlated
//! measurement noise is whitened first so that every scalar has its own
//! independent variance.

use crate::decorrelation::{build_decorrelation, DecorrelationTransform};
use crate::error::{check_finite, Error, Result};
use crate::factorization::{is_psd, udu_decompose_with, FactorTolerances, UdFactors};
use crate::matrix::{dot, Matrix};
use crate::models::{MeasurementModel, ProcessModel};
use crate::propagation::{build_candidate, DegenerateDirection, PropagationInputs};
use crate::update::{modified_agee_turner, ScalarMeasurement};

/// Off-diagonal entries of `R` above this fraction of its largest diagonal
/// trigger decorrelation.
pub const R_OFF_DIAGONAL_REL: f64 = 1e-12;

/// How the predicted measurement is refreshed between scalar updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Relinearization {
    /// Evaluate `h` and `H` once at the prior state and correct each scalar
    /// prediction linearly: `ŷᵢ = hᵢ(x̂⁻) + Hᵢ (x̂ − x̂⁻)`.
    #[default]
    LinearCorrection,
    /// Re-evaluate `h` and `H` at the running estimate before every scalar.
    Reevaluate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    pub relinearization: Relinearization,
    pub factor_tolerances: FactorTolerances,
    /// Smallest accepted `D_r` entry when factoring `R`.
    pub decorrelation_tol: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            relinearization: Relinearization::default(),
            factor_tolerances: FactorTolerances::default(),
            decorrelation_tol: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateEstimate {
    pub x: Vec<f64>,
    pub factors: UdFactors,
    pub epoch: u64,
}

impl StateEstimate {
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn covariance(&self) -> Matrix {
        self.factors.covariance()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdRecord {
    pub epoch: u64,
    pub psd: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativeDEvent {
    pub epoch: u64,
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnovationRecord {
    pub epoch: u64,
    /// Component index within the (possibly decorrelated) measurement vector.
    pub index: usize,
    pub innovation: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateRecord {
    pub epoch: u64,
    pub direction: DegenerateDirection,
}

/// Append-only health log of a filter run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterDiagnostics {
    pub psd_flags: Vec<PsdRecord>,
    pub negative_d_events: Vec<NegativeDEvent>,
    pub innovations: Vec<InnovationRecord>,
    pub degenerate_directions: Vec<DegenerateRecord>,
}

impl FilterDiagnostics {
    pub fn extend(&mut self, other: FilterDiagnostics) {
        self.psd_flags.extend(other.psd_flags);
        self.negative_d_events.extend(other.negative_d_events);
        self.innovations.extend(other.innovations);
        self.degenerate_directions.extend(other.degenerate_directions);
    }

    /// Logs the sign state of `D` for an epoch.
    pub fn record_psd(&mut self, epoch: u64, factors: &UdFactors) {
        let check = is_psd(factors);
        self.psd_flags.push(PsdRecord { epoch, psd: check.psd });
        for (index, &value) in factors.d.as_slice().iter().enumerate() {
            if value < 0.0 {
                self.negative_d_events.push(NegativeDEvent { epoch, index, value });
            }
        }
    }
}

/// Inputs for one epoch: the control applied over the step and the
/// measurement taken at its end, if any.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepInput {
    pub u: Vec<f64>,
    pub y: Option<Vec<f64>>,
}

/// Error that stopped a run, and the epoch it occurred in.
#[derive(Debug, Clone, PartialEq)]
pub struct Halt {
    pub epoch: u64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterRun {
    /// Estimate after initialization and after every completed epoch.
    pub trajectory: Vec<StateEstimate>,
    pub diagnostics: FilterDiagnostics,
    pub halted: Option<Halt>,
}

/// UD-factorized extended Kalman filter.
///
/// Holds configuration and the cached factorization of the last correlated
/// `R` seen, which is reused for as long as `R` stays unchanged.
#[derive(Debug, Clone, Default)]
pub struct UdFilter {
    config: FilterConfig,
    decorrelation: Option<(Matrix, DecorrelationTransform)>,
}

/// Factors the initial covariance.
pub fn initialize(x0: &[f64], p0: &Matrix) -> Result<StateEstimate> {
    UdFilter::default().initialize(x0, p0)
}

impl UdFilter {
    pub fn new(config: FilterConfig) -> Self {
        Self {
            config,
            decorrelation: None,
        }
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    pub fn initialize(&self, x0: &[f64], p0: &Matrix) -> Result<StateEstimate> {
        if p0.shape() != (x0.len(), x0.len()) {
            return Err(Error::DimensionMismatch {
                op: "initialize: P0 vs x0",
                left: p0.shape(),
                right: (x0.len(), 1),
            });
        }
        check_finite("initial state", x0)?;
        Ok(StateEstimate {
            x: x0.to_vec(),
            factors: udu_decompose_with(p0, self.config.factor_tolerances)?,
            epoch: 0,
        })
    }

    /// Propagates state and factors one epoch. `F` and `G` are evaluated at
    /// the posterior state before it is propagated.
    pub fn time_update<P: ProcessModel + ?Sized>(
        &self,
        est: &StateEstimate,
        model: &P,
        u: &[f64],
    ) -> Result<(StateEstimate, FilterDiagnostics)> {
        let f = model.jacobian_f(&est.x, u);
        let g = model.jacobian_g(&est.x, u);
        let x = model.propagate(&est.x, u);
        if x.len() != est.dim() {
            return Err(Error::DimensionMismatch {
                op: "time_update: propagated state",
                left: (x.len(), 1),
                right: (est.dim(), 1),
            });
        }
        check_finite("propagated state", &x)?;

        let mut ws = build_candidate(&PropagationInputs {
            f_jac: &f,
            g_map: &g,
            q_cov: model.process_noise(),
            prior: &est.factors,
        })?;
        let tol = ws.default_tolerance();
        let outcome = ws.orthogonalize(tol)?;

        let epoch = est.epoch + 1;
        let diagnostics = FilterDiagnostics {
            degenerate_directions: outcome
                .degenerate
                .into_iter()
                .map(|direction| DegenerateRecord { epoch, direction })
                .collect(),
            ..Default::default()
        };
        Ok((
            StateEstimate {
                x,
                factors: outcome.factors,
                epoch,
            },
            diagnostics,
        ))
    }

    fn transform_for(&mut self, r: &Matrix) -> Result<&DecorrelationTransform> {
        let stale = !matches!(&self.decorrelation, Some((cached, _)) if cached == r);
        if stale {
            let t = build_decorrelation(r, self.config.decorrelation_tol)?;
            self.decorrelation = Some((r.clone(), t));
        }
        Ok(&self.decorrelation.as_ref().expect("just filled").1)
    }

    /// Processes the measurement vector `y` as a sequence of scalar updates.
    pub fn measurement_update<M: MeasurementModel + ?Sized>(
        &mut self,
        est: &StateEstimate,
        model: &M,
        y: &[f64],
    ) -> Result<(StateEstimate, FilterDiagnostics)> {
        let n = est.dim();
        let r = model.noise_cov();
        let m = y.len();
        if r.shape() != (m, m) {
            return Err(Error::DimensionMismatch {
                op: "measurement_update: R vs y",
                left: r.shape(),
                right: (m, 1),
            });
        }
        check_finite("measurement", y)?;

        let mode = self.config.relinearization;
        let transform = if r.has_off_diagonal(R_OFF_DIAGONAL_REL) {
            Some(self.transform_for(r)?.clone())
        } else {
            None
        };
        let whiten_vec = |v: Vec<f64>| -> Result<Vec<f64>> {
            match &transform {
                Some(t) => t.whiten(&v),
                None => Ok(v),
            }
        };
        let whiten_mat = |h: Matrix| -> Result<Matrix> {
            match &transform {
                Some(t) => t.whiten_matrix(&h),
                None => Ok(h),
            }
        };
        let variances = match &transform {
            Some(t) => t.d_r.as_slice().to_vec(),
            None => r.diagonal(),
        };

        let linearize = |x: &[f64]| -> Result<(Vec<f64>, Matrix)> {
            let pred = model.predict(x);
            let h = model.jacobian_h(x);
            if pred.len() != m || h.shape() != (m, n) {
                return Err(Error::DimensionMismatch {
                    op: "measurement_update: h(x) / H vs y",
                    left: h.shape(),
                    right: (pred.len(), n),
                });
            }
            Ok((whiten_vec(pred)?, whiten_mat(h)?))
        };

        let z = whiten_vec(y.to_vec())?;
        let x_prior = est.x.clone();
        let (pred_prior, h_prior) = linearize(&x_prior)?;

        let mut x = x_prior.clone();
        let mut factors = est.factors.clone();
        let mut diagnostics = FilterDiagnostics::default();
        for i in 0..m {
            let (h_row, predicted) = match mode {
                Relinearization::LinearCorrection => {
                    let h_row = h_prior.row(i).to_vec();
                    let dx: Vec<f64> = x.iter().zip(&x_prior).map(|(a, b)| a - b).collect();
                    let predicted = pred_prior[i] + dot(&h_row, &dx);
                    (h_row, predicted)
                }
                Relinearization::Reevaluate => {
                    let (pred, h) = if i == 0 {
                        (pred_prior.clone(), h_prior.clone())
                    } else {
                        linearize(&x)?
                    };
                    (h.row(i).to_vec(), pred[i])
                }
            };
            if !predicted.is_finite() || !z[i].is_finite() {
                return Err(Error::InnovationNotFinite { index: i });
            }
            let out = modified_agee_turner(
                &factors,
                &ScalarMeasurement {
                    h_row,
                    r_scalar: variances[i],
                    value: z[i],
                    predicted,
                },
            )?;
            if !out.innovation.is_finite() || out.gain.iter().any(|k| !k.is_finite()) {
                return Err(Error::InnovationNotFinite { index: i });
            }
            x.iter_mut()
                .zip(&out.gain)
                .for_each(|(xi, k)| *xi += k * out.innovation);
            diagnostics.innovations.push(InnovationRecord {
                epoch: est.epoch,
                index: i,
                innovation: out.innovation,
                variance: out.innovation_variance,
            });
            factors = out.factors;
        }
        diagnostics.record_psd(est.epoch, &factors);

        Ok((
            StateEstimate {
                x,
                factors,
                epoch: est.epoch,
            },
            diagnostics,
        ))
    }

    /// Alternates time and measurement updates over `inputs`. The first
    /// error stops the run; everything computed up to that point is kept.
    pub fn run<P, M>(&mut self, init: &StateEstimate, process: &P, meas: &M, inputs: &[StepInput]) -> FilterRun
    where
        P: ProcessModel + ?Sized,
        M: MeasurementModel + ?Sized,
    {
        let mut diagnostics = FilterDiagnostics::default();
        diagnostics.record_psd(init.epoch, &init.factors);
        let mut trajectory = vec![init.clone()];
        let mut halted = None;

        for step in inputs {
            let current = trajectory.last().expect("seeded with init");
            let epoch = current.epoch + 1;
            let result = self.time_update(current, process, &step.u).and_then(|(prior, d_prop)| {
                diagnostics.extend(d_prop);
                match &step.y {
                    Some(y) => self.measurement_update(&prior, meas, y),
                    None => {
                        let mut d = FilterDiagnostics::default();
                        d.record_psd(prior.epoch, &prior.factors);
                        Ok((prior, d))
                    }
                }
            });
            match result {
                Ok((post, d_meas)) => {
                    diagnostics.extend(d_meas);
                    trajectory.push(post);
                }
                Err(error) => {
                    halted = Some(Halt { epoch, error });
                    break;
                }
            }
        }

        FilterRun {
            trajectory,
            diagnostics,
            halted,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LinearMeasurement, LinearProcess};

    fn scalar_process(a: f64, q: f64) -> LinearProcess {
        LinearProcess::new(
            Matrix::from_diagonal(&[a]),
            Matrix::identity(1),
            Matrix::from_diagonal(&[q]),
        )
    }

    #[test]
    fn initialize_examples() {
        let est = initialize(&[0.0, 0.0], &Matrix::identity(2)).unwrap();
        assert_eq!(est.factors, UdFactors::diagonal(vec![1.0, 1.0]));
        assert_eq!(est.epoch, 0);
        let est = initialize(&[0.0, 0.0], &Matrix::from_diagonal(&[10.0, 0.1])).unwrap();
        assert_eq!(est.factors.d.as_slice(), &[10.0, 0.1]);
        assert!(initialize(&[0.0], &Matrix::identity(2)).is_err());
    }

    #[test]
    fn identity_dynamics_without_noise() {
        let filter = UdFilter::default();
        let est = initialize(&[1.0, -2.0], &Matrix::from_rows(&[[2.0, 0.5], [0.5, 1.0]]).unwrap()).unwrap();
        let model = LinearProcess::new(Matrix::identity(2), Matrix::zeros(2, 1), Matrix::zeros(1, 1));
        let (next, _) = filter.time_update(&est, &model, &[]).unwrap();
        assert_eq!(next.x, est.x);
        assert!(next.covariance().relative_distance(&est.covariance()).unwrap() < 1e-15);
        assert_eq!(next.epoch, 1);
    }

    #[test]
    fn scalar_time_update() {
        let filter = UdFilter::default();
        let est = initialize(&[1.5], &Matrix::identity(1)).unwrap();
        let (next, _) = filter.time_update(&est, &scalar_process(2.0, 3.0), &[]).unwrap();
        assert_eq!(next.x, vec![3.0]);
        assert_eq!(next.factors.d.as_slice(), &[7.0]);
    }

    #[test]
    fn zero_jacobian_measurement_changes_nothing() {
        let mut filter = UdFilter::default();
        let est = initialize(&[1.0, 2.0], &Matrix::identity(2)).unwrap();
        let meas = LinearMeasurement::new(Matrix::zeros(1, 2), Matrix::from_diagonal(&[1.0]));
        let (post, diag) = filter.measurement_update(&est, &meas, &[5.0]).unwrap();
        assert_eq!(post.x, est.x);
        assert_eq!(post.factors, est.factors);
        assert_eq!(diag.innovations.len(), 1);
        assert!(diag.psd_flags[0].psd);
    }

    #[test]
    fn scalar_measurement_closed_form() {
        let mut filter = UdFilter::default();
        let (x0, p0, r, y) = (1.0, 4.0, 1.0, 3.0);
        let est = initialize(&[x0], &Matrix::from_diagonal(&[p0])).unwrap();
        let meas = LinearMeasurement::new(Matrix::identity(1), Matrix::from_diagonal(&[r]));
        let (post, diag) = filter.measurement_update(&est, &meas, &[y]).unwrap();
        let k = p0 / (p0 + r);
        assert!((post.x[0] - (x0 + k * (y - x0))).abs() < 1e-15);
        assert!((post.factors.d[0] - (1.0 - k) * p0).abs() < 1e-15);
        assert_eq!(diag.innovations[0].innovation, 2.0);
        assert_eq!(diag.innovations[0].variance, 5.0);
    }

    #[test]
    fn measurement_dimension_errors() {
        let mut filter = UdFilter::default();
        let est = initialize(&[1.0], &Matrix::identity(1)).unwrap();
        let meas = LinearMeasurement::new(Matrix::identity(1), Matrix::identity(1));
        assert!(filter.measurement_update(&est, &meas, &[1.0, 2.0]).is_err());
        assert!(filter.measurement_update(&est, &meas, &[f64::NAN]).is_err());
    }

    #[test]
    fn decorrelation_cache_tracks_r() {
        let mut filter = UdFilter::default();
        let est = initialize(&[0.0, 0.0], &Matrix::identity(2)).unwrap();
        let r1 = Matrix::from_rows(&[[2.0, 1.0], [1.0, 1.0]]).unwrap();
        let meas = LinearMeasurement::new(Matrix::identity(2), r1.clone());
        filter.measurement_update(&est, &meas, &[1.0, 1.0]).unwrap();
        assert_eq!(filter.decorrelation.as_ref().unwrap().0, r1);
        let r2 = Matrix::from_rows(&[[3.0, 1.0], [1.0, 1.0]]).unwrap();
        let meas = LinearMeasurement::new(Matrix::identity(2), r2.clone());
        filter.measurement_update(&est, &meas, &[1.0, 1.0]).unwrap();
        assert_eq!(filter.decorrelation.as_ref().unwrap().0, r2);
    }

    #[test]
    fn run_with_no_steps() {
        let mut filter = UdFilter::default();
        let init = initialize(&[0.0], &Matrix::identity(1)).unwrap();
        let meas = LinearMeasurement::new(Matrix::identity(1), Matrix::identity(1));
        let run = filter.run(&init, &scalar_process(1.0, 1.0), &meas, &[]);
        assert_eq!(run.trajectory, vec![init]);
        assert!(run.halted.is_none());
    }

    #[test]
    fn run_halts_and_keeps_partial_trajectory() {
        let mut filter = UdFilter::default();
        let init = initialize(&[0.0], &Matrix::identity(1)).unwrap();
        let meas = LinearMeasurement::new(Matrix::identity(1), Matrix::identity(1));
        let inputs = vec![
            StepInput {
                u: vec![],
                y: Some(vec![1.0]),
            },
            StepInput { u: vec![], y: None },
            StepInput {
                u: vec![],
                y: Some(vec![1.0, 2.0]),
            },
        ];
        let run = filter.run(&init, &scalar_process(1.0, 1.0), &meas, &inputs);
        assert_eq!(run.trajectory.len(), 3);
        let halt = run.halted.unwrap();
        assert_eq!(halt.epoch, 3);
        assert!(matches!(halt.error, Error::DimensionMismatch { .. }));
        assert_eq!(run.diagnostics.psd_flags.len(), 3);
    }
}
