use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{init_position, projected_initial_summary, run_projected_trajectory, run_trajectory, AlgorithmSpec, Horizon, InitMode, Trajectory};
use crate::error::Result;
use crate::gauss::RunningStats;
use crate::models::ModelSpec;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulatorKind {
    /// Full `n`-dimensional iterates.
    #[default]
    Full,
    /// Exact-in-law simulation of the summary only.
    Projected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub replicas: usize,
    pub base_seed: u64,
    pub horizon: Horizon,
    pub record_stride: u64,
    pub init: InitMode,
    pub simulator: SimulatorKind,
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub algorithm: AlgorithmSpec,
    pub streams: Vec<RngStream>,
    pub trajectories: Vec<Trajectory>,
}

/// Pointwise ensemble statistics over the replicas still active at each
/// recorded step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanTrajectory {
    pub step: Vec<u64>,
    pub t: Vec<f64>,
    pub m: Vec<f64>,
    pub r2: Vec<f64>,
    pub m_over_r: Vec<f64>,
    pub m_over_r_stderr: Vec<f64>,
    pub n_active: Vec<usize>,
}

impl Ensemble {
    pub fn diverged_count(&self) -> usize {
        self.trajectories.iter().filter(|t| t.diverged).count()
    }

    /// Mean and standard error of the final `|m|/R` over non-diverged replicas.
    pub fn final_m_over_r(&self) -> (f64, f64) {
        let mut acc = RunningStats::new();
        for tr in self.trajectories.iter().filter(|t| !t.diverged) {
            acc.push(tr.last().m_over_r());
        }
        (acc.mean(), acc.stderr())
    }

    pub fn mean_trajectory(&self) -> MeanTrajectory {
        let len = self.trajectories.iter().map(|t| t.points.len()).max().unwrap_or(0);
        let mut out = MeanTrajectory {
            step: Vec::with_capacity(len),
            t: Vec::with_capacity(len),
            m: Vec::with_capacity(len),
            r2: Vec::with_capacity(len),
            m_over_r: Vec::with_capacity(len),
            m_over_r_stderr: Vec::with_capacity(len),
            n_active: Vec::with_capacity(len),
        };
        for i in 0..len {
            let mut m = RunningStats::new();
            let mut r2 = RunningStats::new();
            let mut q = RunningStats::new();
            let mut pt = None;
            for tr in &self.trajectories {
                if let Some(p) = tr.points.get(i) {
                    m.push(p.m);
                    r2.push(p.r2);
                    q.push(p.m_over_r());
                    pt = Some(*p);
                }
            }
            let p = pt.expect("some replica reaches index i");
            out.step.push(p.step);
            out.t.push(p.t);
            out.m.push(m.mean());
            out.r2.push(r2.mean());
            out.m_over_r.push(q.mean());
            out.m_over_r_stderr.push(q.stderr());
            out.n_active.push(q.count());
        }
        out
    }
}

/// Runs `spec.replicas` independent trajectories. Replica `i` uses stream
/// `i` under `spec.base_seed` for both its initial point and its gradient
/// noise, so two ensembles with equal seeds share their randomness.
pub fn ensemble_run(model: &ModelSpec, algorithm: &AlgorithmSpec, spec: &EnsembleSpec) -> Result<Ensemble> {
    algorithm.validate()?;
    spec.init.validate()?;
    let streams: Vec<RngStream> = (0..spec.replicas as u64).map(|i| RngStream::new(spec.base_seed, i)).collect();
    let trajectories = streams
        .par_iter()
        .map(|s| {
            let mut rng = s.generator();
            match spec.simulator {
                SimulatorKind::Full => {
                    let x0 = init_position(model.dim(), &spec.init, model.spike(), &mut rng)?;
                    run_trajectory(model, algorithm, x0, spec.horizon, spec.record_stride, &mut rng)
                }
                SimulatorKind::Projected => {
                    let start = projected_initial_summary(model.dim(), &spec.init, &mut rng)?;
                    run_projected_trajectory(model, algorithm, start, spec.horizon, spec.record_stride, &mut rng)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble { algorithm: *algorithm, streams, trajectories })
}
