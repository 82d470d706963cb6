use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::{DynamicsSystem, State};
use crate::error::{domain, Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub step_size: f64,
}

impl Path {
    pub fn last(&self) -> State {
        *self.states.last().expect("path is never empty")
    }

    /// Linear interpolation at time `t` (clamped to the path's range).
    pub fn at(&self, t: f64) -> State {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.states[0];
        }
        if t >= self.times[n - 1] {
            return self.states[n - 1];
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        let (a, b) = (self.states[i], self.states[i + 1]);
        [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]
    }
}

fn steps(horizon: f64, h: f64) -> Result<(usize, f64)> {
    if !(horizon >= 0.0) || !(h > 0.0) || !horizon.is_finite() {
        return domain("need a finite horizon >= 0 and a positive step");
    }
    let n = (horizon / h).round().max(1.0) as usize;
    Ok((n, horizon / n as f64))
}

fn drift_checked(sys: &DynamicsSystem, t: f64, u: State) -> Result<State> {
    let d = sys.drift(u);
    if d.iter().all(|x| x.is_finite()) {
        Ok(d)
    } else {
        Err(Error::NonFiniteDrift { t, state: u })
    }
}

fn rk4_step(sys: &DynamicsSystem, t: f64, u: State, h: f64) -> Result<State> {
    let add = |u: State, k: State, s: f64| [u[0] + s * k[0], u[1] + s * k[1]];
    let k1 = drift_checked(sys, t, u)?;
    let k2 = drift_checked(sys, t + h / 2.0, add(u, k1, h / 2.0))?;
    let k3 = drift_checked(sys, t + h / 2.0, add(u, k2, h / 2.0))?;
    let k4 = drift_checked(sys, t + h, add(u, k3, h))?;
    Ok([
        u[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        (u[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])).max(0.0),
    ])
}

/// Classical RK4 with `r2` clamped at zero after each step, recording every
/// `record_every` steps and the endpoint.
pub fn integrate_ode_recorded(sys: &DynamicsSystem, u0: State, horizon: f64, h: f64, record_every: usize) -> Result<Path> {
    let (n, h) = steps(horizon, h)?;
    let every = record_every.max(1);
    let mut path = Path { times: vec![0.0], states: vec![u0], step_size: h };
    let mut u = u0;
    for i in 1..=n {
        u = rk4_step(sys, (i - 1) as f64 * h, u, h)?;
        if i % every == 0 || i == n {
            path.times.push(i as f64 * h);
            path.states.push(u);
        }
    }
    Ok(path)
}

pub fn integrate_ode(sys: &DynamicsSystem, u0: State, horizon: f64, h: f64) -> Result<Path> {
    integrate_ode_recorded(sys, u0, horizon, h, 1)
}

/// Richardson estimate of the endpoint error of RK4 with step `h`.
pub fn endpoint_error_estimate(sys: &DynamicsSystem, u0: State, horizon: f64, h: f64) -> Result<f64> {
    let a = integrate_ode_recorded(sys, u0, horizon, h, usize::MAX)?.last();
    let b = integrate_ode_recorded(sys, u0, horizon, h / 2.0, usize::MAX)?.last();
    Ok(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt() * 16.0 / 15.0)
}

/// Euler-Maruyama with noise on the first coordinate. Coefficients are
/// evaluated with `r2` floored at `1e-8`.
pub fn integrate_sde_em<R: Rng + ?Sized>(
    sys: &DynamicsSystem,
    u0: State,
    horizon: f64,
    h: f64,
    record_every: usize,
    rng: &mut R,
) -> Result<Path> {
    let (n, h) = steps(horizon, h)?;
    let every = record_every.max(1);
    let sh = h.sqrt();
    let mut path = Path { times: vec![0.0], states: vec![u0], step_size: h };
    let mut u = u0;
    for i in 1..=n {
        let t = (i - 1) as f64 * h;
        let ue = [u[0], u[1].max(1e-8)];
        let d = drift_checked(sys, t, ue)?;
        let s = sys.diffusion(ue);
        let z: f64 = rng.sample(StandardNormal);
        u = [u[0] + h * d[0] + sh * s[0] * z, (u[1] + h * d[1]).max(1e-8)];
        if !u[0].is_finite() {
            return Err(Error::NonFiniteDrift { t, state: ue });
        }
        if i % every == 0 || i == n {
            path.times.push(i as f64 * h);
            path.states.push(u);
        }
    }
    Ok(path)
}

/// Cross-path statistics of an SDE ensemble at a set of times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdeMoments {
    pub t: Vec<f64>,
    pub mean_m: Vec<f64>,
    pub mean_m_stderr: Vec<f64>,
    pub var_m: Vec<f64>,
    pub var_m_stderr: Vec<f64>,
    pub mean_r2: Vec<f64>,
    pub paths: usize,
}

/// Sample mean, its standard error, unbiased variance and the standard error
/// of that variance (from the fourth central moment).
pub fn moment_summary(xs: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    (mean, (var / n).sqrt(), var, ((m4 - m2 * m2).max(0.0) / n).sqrt())
}

/// Runs `paths` independent Euler-Maruyama paths, path `i` on stream `i`
/// under `seed`, and summarises the first coordinate at `record_times`.
pub fn sde_ensemble_moments(
    sys: &DynamicsSystem,
    init: impl Fn(&mut crate::rng::StreamRng) -> State + Sync,
    paths: usize,
    horizon: f64,
    h: f64,
    record_times: &[f64],
    seed: u64,
) -> Result<SdeMoments> {
    if paths < 2 {
        return domain("need at least two paths");
    }
    let (n, h_eff) = steps(horizon, h)?;
    let idx: Vec<usize> = record_times.iter().map(|t| ((t / h_eff).round() as usize).min(n)).collect();
    let rows: Vec<Vec<State>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, i).generator();
            let u0 = init(&mut rng);
            let p = integrate_sde_em(sys, u0, horizon, h, 1, &mut rng)?;
            Ok(idx.iter().map(|&j| p.states[j]).collect())
        })
        .collect::<Result<_>>()?;
    let mut out = SdeMoments { t: vec![], mean_m: vec![], mean_m_stderr: vec![], var_m: vec![], var_m_stderr: vec![], mean_r2: vec![], paths };
    for (c, &j) in idx.iter().enumerate() {
        let ms: Vec<f64> = rows.iter().map(|r| r[c][0]).collect();
        let (mean, se, var, var_se) = moment_summary(&ms);
        out.t.push(j as f64 * h_eff);
        out.mean_m.push(mean);
        out.mean_m_stderr.push(se);
        out.var_m.push(var);
        out.var_m_stderr.push(var_se);
        out.mean_r2.push(rows.iter().map(|r| r[c][1]).sum::<f64>() / paths as f64);
    }
    Ok(out)
}
