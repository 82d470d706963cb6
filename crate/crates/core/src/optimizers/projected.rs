//! Exact-in-law simulation of the summary `(m, r)`.
//!
//! Both gradient laws are invariant under rotations fixing the spike, so the
//! iterate can be tracked in a moving frame `(v, e1, e2, e3)` with
//! `x = m v + r e1` and momentum `p = pv v + p1 e1 + p2 e2`. A fresh gradient
//! then only needs its coordinates along `v, e1, e2` plus the norm of its
//! remaining `n - 3` dimensional part, which is chi-distributed. After the
//! update the frame is rotated back to the same canonical form. The cost per
//! step is independent of `n`.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{AlgorithmKind, AlgorithmSpec, Horizon, InitMode, Recorder, Trajectory, DIVERGENCE_NORM};
use crate::error::{domain, Result};
use crate::models::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedState {
    pub m: f64,
    pub r: f64,
    pub pv: f64,
    pub p1: f64,
    pub p2: f64,
}

impl ProjectedState {
    pub fn at_rest(m: f64, r: f64) -> Self {
        Self { m, r, pv: 0.0, p1: 0.0, p2: 0.0 }
    }
}

/// Draws `(m, r)` with the law of the summary of [`super::init_position`].
pub fn projected_initial_summary<R: Rng + ?Sized>(n: usize, mode: &InitMode, rng: &mut R) -> Result<(f64, f64)> {
    mode.validate()?;
    match *mode {
        InitMode::UniformSphere { radius } => {
            let z: f64 = rng.sample(StandardNormal);
            let chi = rand_distr::ChiSquared::new((n - 1) as f64).map_err(|e| crate::Error::Domain(e.to_string()))?;
            let rest: f64 = rng.sample(chi);
            let norm = (z * z + rest).sqrt();
            Ok((radius * z / norm, radius * rest.sqrt() / norm))
        }
        InitMode::FixedSummary { m0, r2_0 } => Ok((m0, r2_0.sqrt())),
    }
}

fn step<R: Rng + ?Sized>(s: &mut ProjectedState, model: &ModelSpec, spec: &AlgorithmSpec, delta: f64, sqrt_n: f64, rng: &mut R) -> bool {
    let g = model.sample_frame_gradient(s.m, s.r, rng);
    match spec.kind {
        AlgorithmKind::SgdU => {
            let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]).sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                return false;
            }
            let a = delta * sqrt_n / norm;
            let x1 = s.r - a * g[1];
            let x2 = a * g[2];
            let x3 = a * g[3];
            s.m -= a * g[0];
            s.r = (x1 * x1 + x2 * x2 + x3 * x3).sqrt();
        }
        AlgorithmKind::Sgd | AlgorithmKind::SgdM => {
            let beta = spec.effective_beta();
            let pv = beta * s.pv - delta * g[0];
            let q1 = beta * s.p1 - delta * g[1];
            let q2 = beta * s.p2 - delta * g[2];
            let q3 = -delta * g[3];
            let x1 = s.r + q1;
            let r = (x1 * x1 + q2 * q2 + q3 * q3).sqrt();
            let qq = q1 * q1 + q2 * q2 + q3 * q3;
            s.m += pv;
            s.pv = pv;
            if r > 0.0 {
                s.p1 = (q1 * x1 + q2 * q2 + q3 * q3) / r;
                s.p2 = (qq - s.p1 * s.p1).max(0.0).sqrt();
            } else {
                s.p1 = 0.0;
                s.p2 = qq.sqrt();
            }
            s.r = r;
        }
    }
    true
}

/// Projected counterpart of [`super::run_trajectory`], started at rest from
/// summary `(m0, r0)`.
pub fn run_projected_trajectory<R: Rng + ?Sized>(
    model: &ModelSpec,
    spec: &AlgorithmSpec,
    start: (f64, f64),
    horizon: Horizon,
    record_stride: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    spec.validate()?;
    let n = model.dim();
    if !(start.1 >= 0.0) {
        return domain("orthogonal norm must be nonnegative");
    }
    let total = horizon.steps(spec, n);
    let delta = spec.step_size(n);
    let sqrt_n = (n as f64).sqrt();
    let mut rec = Recorder::new(record_stride, total, spec.c_delta / n as f64);
    let mut s = ProjectedState::at_rest(start.0, start.1);
    rec.record(0, s.m, s.r * s.r);
    let mut diverged = false;
    let mut skipped = 0;
    let mut done = 0;
    for l in 1..=total {
        if !step(&mut s, model, spec, delta, sqrt_n, rng) {
            skipped += 1;
        }
        done = l;
        let rr = s.m * s.m + s.r * s.r;
        if !rr.is_finite() || rr.sqrt() > DIVERGENCE_NORM {
            diverged = true;
            break;
        }
        if rec.wants(l) {
            rec.record(l, s.m, s.r * s.r);
        }
    }
    Ok(Trajectory { points: rec.points, diverged, skipped_steps: skipped, total_steps: done })
}
