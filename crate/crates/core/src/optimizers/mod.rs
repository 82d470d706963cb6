//! SGD, SGD with momentum and normalized SGD, run either on full
//! `n`-dimensional iterates or on an exact low-dimensional projection.

mod ensemble;
mod projected;

pub use ensemble::{ensemble_run, Ensemble, EnsembleSpec, MeanTrajectory, SimulatorKind};
pub use projected::{projected_initial_summary, run_projected_trajectory, ProjectedState};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::models::{dot, summary, ModelSpec};

/// Iterates with norm above this are treated as diverged.
pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    Sgd,
    SgdM,
    SgdU,
}

/// Algorithm plus its step-size constant; the step size is `c_delta / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    pub kind: AlgorithmKind,
    #[serde(default)]
    pub beta: f64,
    pub c_delta: f64,
}

impl AlgorithmSpec {
    pub fn sgd(c_delta: f64) -> Self {
        Self { kind: AlgorithmKind::Sgd, beta: 0.0, c_delta }
    }

    pub fn momentum(beta: f64, c_delta: f64) -> Self {
        Self { kind: AlgorithmKind::SgdM, beta, c_delta }
    }

    pub fn unit(c_delta: f64) -> Self {
        Self { kind: AlgorithmKind::SgdU, beta: 0.0, c_delta }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_delta > 0.0) || !self.c_delta.is_finite() {
            return domain(format!("c_delta must be positive and finite, got {}", self.c_delta));
        }
        match self.kind {
            AlgorithmKind::SgdM if !(0.0..1.0).contains(&self.beta) => {
                domain(format!("momentum must lie in [0, 1), got {}", self.beta))
            }
            AlgorithmKind::Sgd | AlgorithmKind::SgdU if self.beta != 0.0 => {
                domain("momentum is only meaningful for sgd_m")
            }
            _ => Ok(()),
        }
    }

    pub fn step_size(&self, n: usize) -> f64 {
        self.c_delta / n as f64
    }

    /// Momentum actually applied by the update (zero unless `SgdM`).
    pub fn effective_beta(&self) -> f64 {
        match self.kind {
            AlgorithmKind::SgdM => self.beta,
            _ => 0.0,
        }
    }

    /// Number of steps needed to reach rescaled time `horizon`.
    pub fn steps_for_horizon(&self, horizon: f64, n: usize) -> u64 {
        (horizon * n as f64 / self.c_delta).ceil() as u64
    }

    /// Short label used in file names.
    pub fn tag(&self) -> String {
        match self.kind {
            AlgorithmKind::Sgd => "sgd".into(),
            AlgorithmKind::SgdM => format!("sgdm-{}", self.beta),
            AlgorithmKind::SgdU => "sgdu".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub step_count: u64,
    pub skipped_steps: u64,
}

impl OptimizerState {
    pub fn new(x0: Vec<f64>) -> Self {
        let n = x0.len();
        Self { x: x0, p: vec![0.0; n], step_count: 0, skipped_steps: 0 }
    }
}

/// Applies one update with an already drawn gradient. Returns `false` when a
/// normalized step is skipped because the gradient is zero or non-finite.
pub fn apply_update(state: &mut OptimizerState, spec: &AlgorithmSpec, grad: &[f64]) -> bool {
    let n = state.x.len();
    let delta = spec.step_size(n);
    state.step_count += 1;
    match spec.kind {
        AlgorithmKind::SgdU => {
            let norm = dot(grad, grad).sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                state.skipped_steps += 1;
                return false;
            }
            let scale = delta * (n as f64).sqrt() / norm;
            for (xi, gi) in state.x.iter_mut().zip(grad) {
                *xi -= scale * gi;
            }
        }
        AlgorithmKind::Sgd | AlgorithmKind::SgdM => {
            let beta = spec.effective_beta();
            for ((xi, pi), gi) in state.x.iter_mut().zip(state.p.iter_mut()).zip(grad) {
                *pi = beta * *pi - delta * gi;
                *xi += *pi;
            }
        }
    }
    true
}

/// Draws a gradient from `model` and applies one update.
pub struct Optimizer<'a> {
    pub model: &'a ModelSpec,
    pub spec: AlgorithmSpec,
    grad: Vec<f64>,
}

impl<'a> Optimizer<'a> {
    pub fn new(model: &'a ModelSpec, spec: AlgorithmSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { model, spec, grad: vec![0.0; model.dim()] })
    }

    pub fn step<R: Rng + ?Sized>(&mut self, state: &mut OptimizerState, rng: &mut R) -> bool {
        self.model.sample_gradient_into(&state.x, rng, &mut self.grad);
        apply_update(state, &self.spec, &self.grad)
    }
}

/// How a run starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InitMode {
    UniformSphere { radius: f64 },
    FixedSummary { m0: f64, r2_0: f64 },
}

impl Default for InitMode {
    fn default() -> Self {
        InitMode::UniformSphere { radius: 1.0 }
    }
}

impl InitMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitMode::UniformSphere { radius } if !(radius >= 0.0) || !radius.is_finite() => {
                domain("sphere radius must be finite and nonnegative")
            }
            InitMode::FixedSummary { m0, r2_0 } if !m0.is_finite() || !(r2_0 >= 0.0) || !r2_0.is_finite() => {
                domain("fixed summary needs finite m0 and nonnegative r2_0")
            }
            _ => Ok(()),
        }
    }
}

/// Draws an initial iterate with the requested law.
pub fn init_position<R: Rng + ?Sized>(n: usize, mode: &InitMode, v: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    mode.validate()?;
    let mut g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    match *mode {
        InitMode::UniformSphere { radius } => {
            let norm = dot(&g, &g).sqrt();
            g.iter_mut().for_each(|gi| *gi *= radius / norm);
            Ok(g)
        }
        InitMode::FixedSummary { m0, r2_0 } => {
            let proj = dot(&g, v);
            g.iter_mut().zip(v).for_each(|(gi, vi)| *gi -= proj * vi);
            let norm = dot(&g, &g).sqrt();
            let r0 = r2_0.sqrt();
            Ok(g.iter().zip(v).map(|(gi, vi)| m0 * vi + r0 * gi / norm).collect())
        }
    }
}

/// Either a rescaled time horizon or an explicit number of iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Time(f64),
    Steps(u64),
}

impl Horizon {
    pub fn steps(&self, spec: &AlgorithmSpec, n: usize) -> u64 {
        match *self {
            Horizon::Time(t) => spec.steps_for_horizon(t, n),
            Horizon::Steps(s) => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryPoint {
    pub step: u64,
    pub t: f64,
    pub m: f64,
    pub r2: f64,
}

impl SummaryPoint {
    /// `|m| / R`, zero at the origin.
    pub fn m_over_r(&self) -> f64 {
        let rr = (self.m * self.m + self.r2).sqrt();
        if rr > 0.0 {
            self.m.abs() / rr
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub points: Vec<SummaryPoint>,
    pub diverged: bool,
    pub skipped_steps: u64,
    pub total_steps: u64,
}

impl Trajectory {
    pub fn last(&self) -> &SummaryPoint {
        self.points.last().expect("trajectory has at least the initial point")
    }
}

pub(crate) struct Recorder {
    stride: u64,
    total: u64,
    time_per_step: f64,
    pub points: Vec<SummaryPoint>,
}

impl Recorder {
    pub fn new(stride: u64, total: u64, time_per_step: f64) -> Self {
        let cap = (total / stride.max(1) + 2) as usize;
        Self { stride: stride.max(1), total, time_per_step, points: Vec::with_capacity(cap) }
    }

    pub fn wants(&self, step: u64) -> bool {
        step % self.stride == 0 || step == self.total
    }

    pub fn record(&mut self, step: u64, m: f64, r2: f64) {
        self.points.push(SummaryPoint { step, t: step as f64 * self.time_per_step, m, r2 });
    }
}

/// Runs one trajectory on full iterates, recording the summary every
/// `record_stride` steps and at the final step.
pub fn run_trajectory<R: Rng + ?Sized>(
    model: &ModelSpec,
    spec: &AlgorithmSpec,
    x0: Vec<f64>,
    horizon: Horizon,
    record_stride: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    let n = model.dim();
    if x0.len() != n {
        return domain("initial point has the wrong dimension");
    }
    let mut opt = Optimizer::new(model, *spec)?;
    let total = horizon.steps(spec, n);
    let mut rec = Recorder::new(record_stride, total, spec.c_delta / n as f64);
    let mut state = OptimizerState::new(x0);
    let v = model.spike();
    let (m, r2) = summary(&state.x, v);
    rec.record(0, m, r2);
    let mut diverged = false;
    for step in 1..=total {
        opt.step(&mut state, rng);
        let check = step % 64 == 0;
        if rec.wants(step) || check {
            let (m, r2) = summary(&state.x, v);
            let rr = m * m + r2;
            if !rr.is_finite() || rr.sqrt() > DIVERGENCE_NORM {
                diverged = true;
                break;
            }
            if rec.wants(step) {
                rec.record(step, m, r2);
            }
        }
    }
    Ok(Trajectory {
        points: rec.points,
        diverged,
        skipped_steps: state.skipped_steps,
        total_steps: state.step_count,
    })
}
