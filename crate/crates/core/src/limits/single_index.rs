use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{joint_moment_r2, params, DynamicsSystem, Family, State};
use crate::error::{domain, Result};
use crate::gauss::{GaussHermite, McEstimate, RunningStats};
use crate::models::LinkFunction;
use crate::optimizers::AlgorithmKind;

/// Expectations driving the ballistic SGD limit of single-index models at
/// `(m, r2)`, with `Z = m a1 + r a2` and `D = f(Z) - f(a1) + eps`:
/// `e_m = E[a1 f'(Z) D]`, `e_r1 = E[r a2 f'(Z) D]`, `e_r2 = E[f'(Z)^2 D^2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiGenerators {
    pub e_m: f64,
    pub e_r1: f64,
    pub e_r2: f64,
}

/// Closed forms of [`SiGenerators`] for `f(x) = x^k`.
pub fn monomial_generators(k: u32, m: f64, r2: f64, sigma2: f64) -> SiGenerators {
    let mm = |p: i64, q: i64| if p < 0 || q < 0 { 0.0 } else { joint_moment_r2(p as u32, q as u32, m, r2) };
    let k = k as i64;
    let kf = k as f64;
    let p = kf * (2.0 * kf - 1.0) * mm(2 * k - 2, 0) - kf * (kf - 1.0) * mm(k - 2, k);
    let q = kf * kf * mm(k - 1, k - 1);
    let e_r2 = kf * kf * (mm(4 * k - 2, 0) - 2.0 * mm(3 * k - 2, k) + mm(2 * k - 2, 2 * k) + sigma2 * mm(2 * k - 2, 0));
    SiGenerators { e_m: m * p - q, e_r1: r2 * p, e_r2 }
}

fn sgdm_drift(g: SiGenerators, beta: f64, c_delta: f64) -> State {
    let one_b = 1.0 - beta;
    let c_eff = c_delta / one_b;
    [-2.0 * g.e_m / one_b, -4.0 * (g.e_r1 - c_eff * g.e_r2) / one_b]
}

fn check_sgdm(sigma2: f64, beta: f64, c_delta: f64) -> Result<()> {
    if !(sigma2 >= 0.0) || !(c_delta > 0.0) || !(0.0..1.0).contains(&beta) {
        return domain("need sigma2 >= 0, c_delta > 0 and beta in [0, 1)");
    }
    Ok(())
}

fn si_params(algorithm: AlgorithmKind, link: String, beta: f64, c_delta: f64, sigma2: f64) -> super::SystemParams {
    let mut p = params(Family::SingleIndex, algorithm, beta, c_delta);
    p.link = Some(link);
    p.sigma2 = Some(sigma2);
    p
}

/// SGD-M limit for a monomial link using closed-form Gaussian moments.
/// Polynomial in `(m, r2)`, so it is defined for slightly negative `r2` too.
pub fn si_sgdm_system_monomial(k: u32, sigma2: f64, beta: f64, c_delta: f64) -> Result<DynamicsSystem> {
    check_sgdm(sigma2, beta, c_delta)?;
    if k == 0 {
        return domain("monomial degree must be at least 1");
    }
    let alg = if beta == 0.0 { AlgorithmKind::Sgd } else { AlgorithmKind::SgdM };
    let mut p = si_params(alg, format!("x^{k}"), beta, c_delta, sigma2);
    p.k = Some(k);
    Ok(DynamicsSystem::ballistic("si_sgdm_monomial", p, move |[m, r2]: State| {
        sgdm_drift(monomial_generators(k, m, r2, sigma2), beta, c_delta)
    }))
}

/// Generators for an arbitrary link by tensor Gauss-Hermite quadrature.
pub fn quadrature_generators(link: &LinkFunction, gh: &GaussHermite, m: f64, r2: f64, sigma2: f64) -> Result<SiGenerators> {
    let r = r2.max(0.0).sqrt();
    let e_m = gh.expect_2d(|a1, a2| {
        let z = m * a1 + r * a2;
        a1 * link.derivative(z) * (link.eval(z) - link.eval(a1))
    })?;
    let e_r1 = gh.expect_2d(|a1, a2| {
        let z = m * a1 + r * a2;
        r * a2 * link.derivative(z) * (link.eval(z) - link.eval(a1))
    })?;
    let e_r2 = gh.expect_2d(|a1, a2| {
        let z = m * a1 + r * a2;
        let d = link.eval(z) - link.eval(a1);
        link.derivative(z).powi(2) * (d * d + sigma2)
    })?;
    Ok(SiGenerators { e_m, e_r1, e_r2 })
}

/// SGD-M limit for any link, expectations by Gauss-Hermite quadrature of
/// the given order. Fails when doubling the order moves the drift by more
/// than `1e-6` (relative) at a few probe points.
pub fn si_sgdm_system_quadrature(link: LinkFunction, sigma2: f64, beta: f64, c_delta: f64, order: usize) -> Result<DynamicsSystem> {
    check_sgdm(sigma2, beta, c_delta)?;
    let gh = GaussHermite::new(order)?;
    let gh2 = GaussHermite::new(2 * order)?;
    for &(m, r2) in &[(0.5, 0.25), (0.9, 0.1), (0.1, 1.0)] {
        let a = sgdm_drift(quadrature_generators(&link, &gh, m, r2, sigma2)?, beta, c_delta);
        let b = sgdm_drift(quadrature_generators(&link, &gh2, m, r2, sigma2)?, beta, c_delta);
        for i in 0..2 {
            if (a[i] - b[i]).abs() > 1e-6 * b[i].abs().max(1.0) {
                return domain(format!("quadrature of order {order} not converged at ({m}, {r2})"));
            }
        }
    }
    let alg = if beta == 0.0 { AlgorithmKind::Sgd } else { AlgorithmKind::SgdM };
    let p = si_params(alg, link.name(), beta, c_delta, sigma2);
    let gh = Arc::new(gh);
    Ok(DynamicsSystem::ballistic("si_sgdm_quadrature", p, move |[m, r2]: State| {
        match quadrature_generators(&link, &gh, m, r2, sigma2) {
            Ok(g) => sgdm_drift(g, beta, c_delta),
            Err(_) => [f64::NAN, f64::NAN],
        }
    }))
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Normalized-SGD limit with expectations replaced by averages over a fixed
/// set of draws `(a1, a2, eps)`, so the drift is a deterministic function.
#[derive(Clone)]
pub struct SiSgduMonteCarlo {
    link: LinkFunction,
    pub sigma2: f64,
    pub c_delta: f64,
    samples: Arc<Vec<[f64; 3]>>,
}

impl SiSgduMonteCarlo {
    pub fn drift_estimate(&self, [m, r2]: State) -> [McEstimate; 2] {
        let r = r2.max(0.0).sqrt();
        let mut dm = RunningStats::new();
        let mut dr = RunningStats::new();
        for &[a1, a2, eps] in self.samples.iter() {
            let z = m * a1 + r * a2;
            let s = sign(self.link.derivative(z) * (self.link.eval(z) - self.link.eval(a1) + eps));
            dm.push(-a1 * s);
            dr.push(-2.0 * r * a2 * s + self.c_delta);
        }
        [dm.estimate(), dr.estimate()]
    }

    pub fn system(&self) -> DynamicsSystem {
        let me = self.clone();
        let p = si_params(AlgorithmKind::SgdU, self.link.name(), 0.0, self.c_delta, self.sigma2);
        DynamicsSystem::ballistic("si_sgdu_mc", p, move |u| {
            let [a, b] = me.drift_estimate(u);
            [a.mean, b.mean]
        })
    }
}

pub fn si_sgdu_system_mc<R: Rng + ?Sized>(link: LinkFunction, sigma2: f64, c_delta: f64, n_mc: usize, rng: &mut R) -> Result<SiSgduMonteCarlo> {
    if !(sigma2 >= 0.0) || !(c_delta > 0.0) || n_mc < 2 {
        return domain("need sigma2 >= 0, c_delta > 0 and at least two samples");
    }
    let sd = sigma2.sqrt();
    let samples = (0..n_mc)
        .map(|_| {
            let a1: f64 = rng.sample(StandardNormal);
            let a2: f64 = rng.sample(StandardNormal);
            let e: f64 = rng.sample(StandardNormal);
            [a1, a2, sd * e]
        })
        .collect();
    Ok(SiSgduMonteCarlo { link, sigma2, c_delta, samples: Arc::new(samples) })
}

fn sqrt_2_over_pi() -> f64 {
    (2.0 / PI).sqrt()
}

/// Noise-free normalized-SGD drift for a strictly increasing link. Returns
/// the continuous extension `(0, c_delta)` at `(1, 0)` together with `true`.
pub fn si_sgdu_increasing_drift_checked(c_delta: f64, [m, r2]: State) -> (State, bool) {
    let d = ((m - 1.0).powi(2) + r2).sqrt();
    if d == 0.0 {
        return ([0.0, c_delta], true);
    }
    let k = sqrt_2_over_pi();
    ([-k * (m - 1.0) / d, -2.0 * k * r2 / d + c_delta], false)
}

pub fn si_sgdu_system_increasing(c_delta: f64) -> Result<DynamicsSystem> {
    if !(c_delta > 0.0) {
        return domain("c_delta must be positive");
    }
    let p = si_params(AlgorithmKind::SgdU, "increasing".into(), 0.0, c_delta, 0.0);
    Ok(DynamicsSystem::ballistic("si_sgdu_increasing", p, move |u| si_sgdu_increasing_drift_checked(c_delta, u).0))
}

pub fn evenpoly_f(x: f64, y: f64) -> f64 {
    (x - 1.0) / ((x - 1.0).powi(2) + y * y).sqrt() + (x + 1.0) / ((x + 1.0).powi(2) + y * y).sqrt()
        - x / (x * x + y * y).sqrt()
}

pub fn evenpoly_g(x: f64, y: f64) -> f64 {
    1.0 / ((x - 1.0).powi(2) + y * y).sqrt() + 1.0 / ((x + 1.0).powi(2) + y * y).sqrt() - 1.0 / (x * x + y * y).sqrt()
}

/// Noise-free normalized-SGD limit for an even link increasing on the
/// positive half line. Undefined (NaN) for `r2 <= 0`.
pub fn si_sgdu_system_even(c_delta: f64) -> Result<DynamicsSystem> {
    if !(c_delta > 0.0) {
        return domain("c_delta must be positive");
    }
    let p = si_params(AlgorithmKind::SgdU, "even".into(), 0.0, c_delta, 0.0);
    let k = sqrt_2_over_pi();
    Ok(DynamicsSystem::ballistic("si_sgdu_even", p, move |[m, r2]: State| {
        if !(r2 > 0.0) {
            return [f64::NAN, f64::NAN];
        }
        let r = r2.sqrt();
        [-k * evenpoly_f(m, r), -2.0 * k * r2 * evenpoly_g(m, r) + c_delta]
    }))
}
