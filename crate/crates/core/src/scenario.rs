//! Scenario files, truth simulation, and run reports.
//!
//! A scenario is a TOML document (schema `udkf-scenario/1`) naming a
//! built-in model or giving explicit linear matrices. Matrices are arrays of
//! rows, conventionally one row per line. Running a scenario simulates a
//! truth trajectory with the seeded [`SplitMix64`] stream, filters it with the
//! UD filter, the dense oracle, or both, and emits a per-epoch CSV plus a
//! TOML summary. Output is a pure function of the file contents.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::factorization::{udu_decompose_with, FactorTolerances};
use crate::filter::{FilterConfig, FilterRun, Relinearization, StepInput, UdFilter};
use crate::matrix::{Matrix, UnitUpperTriangular};
use crate::models::{
    constant_velocity_1d, constant_velocity_2d, LinearMeasurement, LinearProcess, MeasurementModel, ProcessModel,
    RangeBearing,
};
use crate::oracle::{min_eigenvalue, DenseEkf, DenseRun, UpdateForm};
use crate::rng::SplitMix64;

pub const SCENARIO_SCHEMA: &str = "udkf-scenario/1";
pub const REPORT_SCHEMA: &str = "udkf-report/1";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Validation(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError::Validation(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// `x' = a x + w`, `y = x + v`.
    Scalar,
    /// 1-D position/velocity, position measured.
    ConstantVelocity,
    /// 2-D position/velocity, range and bearing measured from the origin.
    RangeBearing,
    /// Explicit `F`, `G`, `H` in the `[custom]` table.
    CustomLinear,
}

impl ModelKind {
    /// `(n, q, m)` for the built-in models.
    fn fixed_dims(self) -> Option<(usize, usize, usize)> {
        match self {
            ModelKind::Scalar => Some((1, 1, 1)),
            ModelKind::ConstantVelocity => Some((2, 1, 1)),
            ModelKind::RangeBearing => Some((4, 2, 2)),
            ModelKind::CustomLinear => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Scalar => "scalar",
            ModelKind::ConstantVelocity => "constant-velocity",
            ModelKind::RangeBearing => "range-bearing",
            ModelKind::CustomLinear => "custom-linear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterMode {
    #[default]
    Ud,
    Dense,
    Both,
}

impl FilterMode {
    fn runs_ud(self) -> bool {
        matches!(self, FilterMode::Ud | FilterMode::Both)
    }

    fn runs_dense(self) -> bool {
        matches!(self, FilterMode::Dense | FilterMode::Both)
    }

    fn name(self) -> &'static str {
        match self {
            FilterMode::Ud => "ud",
            FilterMode::Dense => "dense",
            FilterMode::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelinearizationMode {
    #[default]
    LinearCorrection,
    Reevaluate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomLinear {
    pub f: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub trajectory: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

fn every_step() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: String,
    pub model: ModelKind,
    pub steps: u64,
    pub seed: u64,
    #[serde(default)]
    pub mode: FilterMode,
    #[serde(default)]
    pub relinearization: RelinearizationMode,
    /// Sample interval for the kinematic models.
    #[serde(default = "one")]
    pub dt: f64,
    /// Transition coefficient `a` of the scalar model.
    #[serde(default = "one")]
    pub transition: f64,
    /// Measurements arrive at epochs divisible by this; others only propagate.
    #[serde(default = "every_step")]
    pub measure_every: u64,
    pub n: Option<usize>,
    pub q: Option<usize>,
    pub m: Option<usize>,
    pub initial_state: Vec<f64>,
    pub initial_covariance: Vec<Vec<f64>>,
    /// Truth starts here; defaults to `initial_state`.
    pub truth_initial_state: Option<Vec<f64>>,
    pub process_noise: Vec<Vec<f64>>,
    pub measurement_noise: Vec<Vec<f64>>,
    pub custom: Option<CustomLinear>,
    pub output: Option<OutputPaths>,
}

/// Process and measurement models built from a scenario.
pub type Models = (Box<dyn ProcessModel + Sync>, Box<dyn MeasurementModel + Sync>);

/// Resolved state, noise, and measurement dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub q: usize,
    pub m: usize,
}

fn to_matrix(name: &str, rows: &[Vec<f64>]) -> Result<Matrix, ScenarioError> {
    if rows.is_empty() {
        return invalid(format!("{name} is empty"));
    }
    Matrix::from_rows(rows).map_err(|e| ScenarioError::Validation(format!("{name}: {e}")))
}

fn check_shape(name: &str, m: &Matrix, shape: (usize, usize)) -> Result<(), ScenarioError> {
    if m.shape() != shape {
        return invalid(format!(
            "{name} dimension mismatch: expected {}x{}, got {}x{}",
            shape.0,
            shape.1,
            m.rows(),
            m.cols()
        ));
    }
    Ok(())
}

fn check_covariance(name: &str, m: &Matrix) -> Result<(), ScenarioError> {
    let limit = FactorTolerances::default().symmetry * m.max_abs();
    if m.max_asymmetry() > limit {
        return invalid(format!("{name} is not symmetric"));
    }
    if let Some(i) = m.diagonal().iter().position(|&d| d < 0.0) {
        return invalid(format!("{name} has negative diagonal entry {i}"));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config always serializes")
    }

    /// Checks every dimension and covariance invariant, returning the
    /// resolved dimensions.
    pub fn validate(&self) -> Result<Dims, ScenarioError> {
        if self.schema != SCENARIO_SCHEMA {
            return invalid(format!("schema must be \"{SCENARIO_SCHEMA}\", got \"{}\"", self.schema));
        }
        if self.measure_every == 0 {
            return invalid("measure_every must be at least 1");
        }
        if !self.dt.is_finite() || !self.transition.is_finite() {
            return invalid("dt and transition must be finite");
        }

        let custom = match (self.model, &self.custom) {
            (ModelKind::CustomLinear, Some(c)) => {
                Some((to_matrix("F", &c.f)?, to_matrix("G", &c.g)?, to_matrix("H", &c.h)?))
            }
            (ModelKind::CustomLinear, None) => return invalid("custom-linear model requires a [custom] table"),
            (_, Some(_)) => return invalid("[custom] table is only valid with model = \"custom-linear\""),
            (_, None) => None,
        };

        let implied = match (self.model.fixed_dims(), &custom) {
            (Some(d), _) => d,
            (None, Some((f, g, h))) => (f.rows(), g.cols(), h.rows()),
            (None, None) => unreachable!(),
        };
        let dims = Dims {
            n: self.n.unwrap_or(implied.0),
            q: self.q.unwrap_or(implied.1),
            m: self.m.unwrap_or(implied.2),
        };
        if let Some((n, q, m)) = self.model.fixed_dims() {
            if (dims.n, dims.q, dims.m) != (n, q, m) {
                return invalid(format!(
                    "model {} has n={n}, q={q}, m={m}; file states n={}, q={}, m={}",
                    self.model.name(),
                    dims.n,
                    dims.q,
                    dims.m
                ));
            }
        }
        if dims.n == 0 || dims.m == 0 {
            return invalid("n and m must be at least 1");
        }

        if self.initial_state.len() != dims.n {
            return invalid(format!(
                "x0 dimension mismatch: expected {}, got {}",
                dims.n,
                self.initial_state.len()
            ));
        }
        if let Some(t) = &self.truth_initial_state {
            if t.len() != dims.n {
                return invalid(format!(
                    "truth x0 dimension mismatch: expected {}, got {}",
                    dims.n,
                    t.len()
                ));
            }
        }
        if self.initial_state.iter().any(|v| !v.is_finite()) {
            return invalid("x0 has a non-finite entry");
        }
        let p0 = to_matrix("P0", &self.initial_covariance)?;
        check_shape("P0", &p0, (dims.n, dims.n))?;
        check_covariance("P0", &p0)?;
        let q = to_matrix("Q", &self.process_noise)?;
        check_shape("Q", &q, (dims.q, dims.q))?;
        check_covariance("Q", &q)?;
        let r = to_matrix("R", &self.measurement_noise)?;
        check_shape("R", &r, (dims.m, dims.m))?;
        check_covariance("R", &r)?;
        if let Some((f, g, h)) = &custom {
            check_shape("F", f, (dims.n, dims.n))?;
            check_shape("G", g, (dims.n, dims.q))?;
            check_shape("H", h, (dims.m, dims.n))?;
        }
        Ok(dims)
    }

    fn matrix(&self, name: &str, rows: &[Vec<f64>]) -> Matrix {
        to_matrix(name, rows).expect("validated")
    }

    /// Builds the process and measurement models the scenario describes.
    pub fn build_models(&self) -> Result<Models, ScenarioError> {
        let dims = self.validate()?;
        let q = self.matrix("Q", &self.process_noise);
        let r = self.matrix("R", &self.measurement_noise);
        Ok(match self.model {
            ModelKind::Scalar => (
                Box::new(LinearProcess::new(
                    Matrix::from_diagonal(&[self.transition]),
                    Matrix::identity(1),
                    q,
                )),
                Box::new(LinearMeasurement::new(Matrix::identity(1), r)),
            ),
            ModelKind::ConstantVelocity => {
                let mut process = constant_velocity_1d(self.dt, 0.0);
                process.q = q;
                let h = Matrix::from_rows(&[[1.0, 0.0]]).expect("finite");
                (Box::new(process), Box::new(LinearMeasurement::new(h, r)))
            }
            ModelKind::RangeBearing => (
                Box::new(constant_velocity_2d(self.dt, q)),
                Box::new(RangeBearing { state_dim: dims.n, r }),
            ),
            ModelKind::CustomLinear => {
                let c = self.custom.as_ref().expect("validated");
                (
                    Box::new(LinearProcess::new(self.matrix("F", &c.f), self.matrix("G", &c.g), q)),
                    Box::new(LinearMeasurement::new(self.matrix("H", &c.h), r)),
                )
            }
        })
    }

    pub fn filter_config(&self) -> FilterConfig {
        FilterConfig {
            relinearization: match self.relinearization {
                RelinearizationMode::LinearCorrection => Relinearization::LinearCorrection,
                RelinearizationMode::Reevaluate => Relinearization::Reevaluate,
            },
            ..FilterConfig::default()
        }
    }
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ScenarioConfig::from_toml_str(&text)
}

/// Draws zero-mean Gaussian vectors with a given covariance using its UD
/// factors: `x = U (√d ∘ ε)`.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    u: UnitUpperTriangular,
    scale: Vec<f64>,
}

impl GaussianSampler {
    pub fn new(cov: &Matrix) -> crate::Result<Self> {
        let f = udu_decompose_with(cov, FactorTolerances::default())?;
        let scale = f.d.as_slice().iter().map(|d| d.max(0.0).sqrt()).collect();
        Ok(Self { u: f.u, scale })
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> Vec<f64> {
        let e: Vec<f64> = self.scale.iter().map(|s| s * rng.normal()).collect();
        self.u.mul_vec(&e)
    }
}

/// Truth trajectory and the inputs the filters consume.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub truth: Vec<Vec<f64>>,
    pub inputs: Vec<StepInput>,
}

/// Simulates `steps` epochs of `x ← f(x) + G w`, `y = h(x) + v`. At each epoch
/// the process noise is drawn first, then the measurement noise if a
/// measurement is due.
pub fn simulate(
    process: &dyn ProcessModel,
    meas: &dyn MeasurementModel,
    x0: &[f64],
    steps: u64,
    measure_every: u64,
    seed: u64,
) -> crate::Result<Simulation> {
    let mut rng = SplitMix64::new(seed);
    let w_sampler = GaussianSampler::new(process.process_noise())?;
    let v_sampler = GaussianSampler::new(meas.noise_cov())?;
    let mut truth = vec![x0.to_vec()];
    let mut inputs = Vec::with_capacity(steps as usize);
    for k in 1..=steps {
        let x = truth.last().expect("seeded");
        let g = process.jacobian_g(x, &[]);
        let w = w_sampler.sample(&mut rng);
        let gw = g.mul_vec(&w)?;
        let next: Vec<f64> = process.propagate(x, &[]).iter().zip(&gw).map(|(a, b)| a + b).collect();
        let y = (k % measure_every == 0).then(|| {
            let v = v_sampler.sample(&mut rng);
            meas.predict(&next).iter().zip(&v).map(|(a, b)| a + b).collect()
        });
        inputs.push(StepInput { u: Vec::new(), y });
        truth.push(next);
    }
    Ok(Simulation { truth, inputs })
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub epoch: u64,
    pub x: Vec<f64>,
    /// `D` entries for UD runs, `diag(P)` for dense-only runs.
    pub d: Vec<f64>,
    pub psd: bool,
    pub truth: Vec<f64>,
    pub innovations: Vec<f64>,
    pub innovation_variances: Vec<f64>,
    pub state_divergence: Option<f64>,
    pub covariance_divergence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HaltSummary {
    pub filter: String,
    pub epoch: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub schema: String,
    pub model: String,
    pub mode: String,
    pub relinearization: String,
    pub steps: u64,
    pub seed: u64,
    pub records: usize,
    pub negative_d_events: usize,
    pub degenerate_directions: usize,
    pub measurement_updates: usize,
    /// Fraction of normalized innovations within ±1.96.
    pub innovation_consistency: Option<f64>,
    pub max_state_divergence: Option<f64>,
    pub max_covariance_divergence: Option<f64>,
    pub halted: Option<HaltSummary>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub n: usize,
    pub m: usize,
    /// Whether the `d` columns hold `D` (UD run) or `diag(P)` (dense only).
    pub ud_columns: bool,
    pub records: Vec<StepRecord>,
    pub summary: RunSummary,
    /// Not part of any emitted file, so that output stays reproducible.
    pub wall_time: Duration,
}

fn state_divergence(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = b.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    diff / scale
}

/// Runs a validated scenario end to end.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport, ScenarioError> {
    let start = Instant::now();
    let dims = cfg.validate()?;
    let (process, meas) = cfg.build_models()?;
    let truth_x0 = cfg.truth_initial_state.as_ref().unwrap_or(&cfg.initial_state);
    let sim = simulate(
        process.as_ref(),
        meas.as_ref(),
        truth_x0,
        cfg.steps,
        cfg.measure_every,
        cfg.seed,
    )
    .map_err(|e| ScenarioError::Validation(format!("noise covariance: {e}")))?;
    let p0 = to_matrix("P0", &cfg.initial_covariance)?;

    let mut ud_run: Option<FilterRun> = None;
    let mut halted = None;
    if cfg.mode.runs_ud() {
        let mut filter = UdFilter::new(cfg.filter_config());
        match filter.initialize(&cfg.initial_state, &p0) {
            Ok(init) => {
                let run = filter.run(&init, process.as_ref(), meas.as_ref(), &sim.inputs);
                if let Some(h) = &run.halted {
                    halted = Some(HaltSummary {
                        filter: "ud".into(),
                        epoch: h.epoch,
                        reason: h.error.to_string(),
                    });
                }
                ud_run = Some(run);
            }
            Err(e) => {
                halted = Some(HaltSummary {
                    filter: "ud".into(),
                    epoch: 0,
                    reason: e.to_string(),
                })
            }
        }
    }
    let dense_run: Option<DenseRun> = cfg.mode.runs_dense().then(|| {
        let ekf = DenseEkf::new(UpdateForm::Joseph);
        let init = ekf.initialize(&cfg.initial_state, &p0);
        ekf.run(&init, process.as_ref(), meas.as_ref(), &sim.inputs)
    });
    if halted.is_none() {
        if let Some(h) = dense_run.as_ref().and_then(|r| r.halted.as_ref()) {
            halted = Some(HaltSummary {
                filter: "dense".into(),
                epoch: h.epoch,
                reason: h.error.to_string(),
            });
        }
    }

    let len = match (&ud_run, &dense_run) {
        (Some(u), Some(d)) => u.trajectory.len().min(d.trajectory.len()),
        (Some(u), None) => u.trajectory.len(),
        (None, Some(d)) => d.trajectory.len(),
        (None, None) => 0,
    };

    let mut records = Vec::with_capacity(len);
    for k in 0..len {
        let epoch = k as u64;
        let dense = dense_run.as_ref().map(|r| &r.trajectory[k]);
        let (x, d, psd, innovations, innovation_variances) = match &ud_run {
            Some(run) => {
                let est = &run.trajectory[k];
                let diag = &run.diagnostics;
                let psd = diag
                    .psd_flags
                    .iter()
                    .rev()
                    .find(|p| p.epoch == epoch)
                    .is_none_or(|p| p.psd);
                let inns: Vec<_> = diag.innovations.iter().filter(|r| r.epoch == epoch).collect();
                (
                    est.x.clone(),
                    est.factors.d.as_slice().to_vec(),
                    psd,
                    inns.iter().map(|r| r.innovation).collect(),
                    inns.iter().map(|r| r.variance).collect(),
                )
            }
            None => {
                let est = dense.expect("one filter ran");
                (
                    est.x.clone(),
                    est.p.diagonal(),
                    min_eigenvalue(&est.p) >= 0.0,
                    vec![],
                    vec![],
                )
            }
        };
        let (state_divergence, covariance_divergence) = match (&ud_run, dense) {
            (Some(run), Some(dense)) => {
                let est = &run.trajectory[k];
                (
                    Some(state_divergence(&est.x, &dense.x)),
                    Some(est.covariance().relative_distance(&dense.p).expect("same shape")),
                )
            }
            _ => (None, None),
        };
        records.push(StepRecord {
            epoch,
            x,
            d,
            psd,
            truth: sim.truth[k].clone(),
            innovations,
            innovation_variances,
            state_divergence,
            covariance_divergence,
        });
    }

    let max_of = |f: fn(&StepRecord) -> Option<f64>| {
        records
            .iter()
            .filter_map(f)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
    };
    let (negative_d_events, degenerate_directions, measurement_updates, innovation_consistency) = match &ud_run {
        Some(run) => {
            let inns = &run.diagnostics.innovations;
            let within = inns
                .iter()
                .filter(|r| (r.innovation / r.variance.sqrt()).abs() <= 1.96)
                .count();
            (
                run.diagnostics.negative_d_events.len(),
                run.diagnostics.degenerate_directions.len(),
                inns.len(),
                (!inns.is_empty()).then(|| within as f64 / inns.len() as f64),
            )
        }
        None => (0, 0, 0, None),
    };
    let summary = RunSummary {
        schema: REPORT_SCHEMA.into(),
        model: cfg.model.name().into(),
        mode: cfg.mode.name().into(),
        relinearization: match cfg.relinearization {
            RelinearizationMode::LinearCorrection => "linear-correction".into(),
            RelinearizationMode::Reevaluate => "reevaluate".into(),
        },
        steps: cfg.steps,
        seed: cfg.seed,
        records: records.len(),
        negative_d_events,
        degenerate_directions,
        measurement_updates,
        innovation_consistency,
        max_state_divergence: max_of(|r| r.state_divergence),
        max_covariance_divergence: max_of(|r| r.covariance_divergence),
        halted,
    };

    Ok(RunReport {
        n: dims.n,
        m: dims.m,
        ud_columns: cfg.mode.runs_ud(),
        records,
        summary,
        wall_time: start.elapsed(),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

impl RunReport {
    pub fn csv_header(&self) -> Vec<String> {
        let d_prefix = if self.ud_columns { "d" } else { "p" };
        let mut h = vec!["schema".to_string(), "epoch".to_string()];
        h.extend((0..self.n).map(|i| format!("x{i}")));
        h.extend((0..self.n).map(|i| format!("{d_prefix}{i}")));
        h.push("psd_flag".into());
        h.extend((0..self.n).map(|i| format!("truth{i}")));
        h.extend((0..self.m).map(|i| format!("innovation{i}")));
        h.extend((0..self.m).map(|i| format!("innovation_variance{i}")));
        h.push("state_divergence".into());
        h.push("covariance_divergence".into());
        h
    }

    /// Per-epoch trajectory as CSV. Floats use the shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.csv_header()).expect("in-memory write");
        for r in &self.records {
            let mut row = vec![REPORT_SCHEMA.to_string(), r.epoch.to_string()];
            row.extend(r.x.iter().map(f64::to_string));
            row.extend(r.d.iter().map(f64::to_string));
            row.push(u8::from(r.psd).to_string());
            row.extend(r.truth.iter().map(f64::to_string));
            for i in 0..self.m {
                row.push(fmt_opt(r.innovations.get(i).copied()));
            }
            for i in 0..self.m {
                row.push(fmt_opt(r.innovation_variances.get(i).copied()));
            }
            row.push(fmt_opt(r.state_divergence));
            row.push(fmt_opt(r.covariance_divergence));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    /// Summary as TOML.
    pub fn summary_text(&self) -> String {
        toml::to_string(&self.summary).expect("summary always serializes")
    }

    pub fn timing_line(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "wall_time_s = {:.6}", self.wall_time.as_secs_f64());
        s
    }
}
