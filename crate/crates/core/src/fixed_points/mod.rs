//! Fixed points of the limit dynamics, their stability, and critical
//! signal-strength and step-size thresholds.

mod evenpoly;
mod thresholds;

pub use evenpoly::{evenpoly_c_max, evenpoly_c_of_r, evenpoly_fixed_point, evenpoly_m_of_r, evenpoly_series, EVENPOLY_C_AT_ONE_BOUND};
pub use thresholds::{
    lambda_crit_sgdm, lambda_crit_sgdu, max_admissible_step, si_monomial_cdelta_threshold,
    si_monomial_threshold_decay_check, DecayCheck,
};

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::limits::{si_sgdm_system_monomial, tpca_sgdm_system, tpca_sgdu_system, DynamicsSystem, State};
use crate::optimizers::{AlgorithmKind, AlgorithmSpec};

/// Largest drift norm accepted at a candidate fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub label: String,
    pub point: State,
    pub stability: Stability,
    pub eigenvalues: [Eigenvalue; 2],
    pub context: String,
}

/// Central-difference Jacobian of the drift.
pub fn jacobian(sys: &DynamicsSystem, u: State, h: f64) -> [[f64; 2]; 2] {
    let mut j = [[0.0; 2]; 2];
    for c in 0..2 {
        let mut up = u;
        let mut dn = u;
        up[c] += h;
        dn[c] -= h;
        let (a, b) = (sys.drift(up), sys.drift(dn));
        for r in 0..2 {
            j[r][c] = (a[r] - b[r]) / (2.0 * h);
        }
    }
    j
}

fn eigenvalues(j: [[f64; 2]; 2]) -> [Eigenvalue; 2] {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [Eigenvalue { re: tr / 2.0 - s, im: 0.0 }, Eigenvalue { re: tr / 2.0 + s, im: 0.0 }]
    } else {
        let s = (-disc).sqrt();
        [Eigenvalue { re: tr / 2.0, im: -s }, Eigenvalue { re: tr / 2.0, im: s }]
    }
}

/// Linear stability of `point`, which must zero the drift to within
/// [`FIXED_POINT_TOL`].
pub fn classify_stability(sys: &DynamicsSystem, point: State) -> Result<(Stability, [Eigenvalue; 2])> {
    let d = sys.drift(point);
    let norm = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if !(norm <= FIXED_POINT_TOL) {
        return Err(Error::NotFixedPoint { point, norm });
    }
    let j = jacobian(sys, point, 1e-6);
    let ev = eigenvalues(j);
    let scale = j.iter().flatten().fold(1.0f64, |a, b| a.max(b.abs()));
    let tol = 1e-6 * scale;
    let top = ev[0].re.max(ev[1].re);
    let stability = if top > tol {
        Stability::Unstable
    } else if top < -tol {
        Stability::Stable
    } else {
        Stability::Marginal
    };
    Ok((stability, ev))
}

pub fn report(sys: &DynamicsSystem, label: &str, point: State) -> Result<FixedPointReport> {
    let (stability, eigenvalues) = classify_stability(sys, point)?;
    Ok(FixedPointReport { label: label.into(), point, stability, eigenvalues, context: sys.params.context() })
}

/// All fixed points of the `k = 2` tensor-PCA ballistic limit. The origin is
/// listed for SGD and SGD-M only; normalized SGD has drift `(0, c_delta)` there.
pub fn tpca_fixed_points(algorithm: &AlgorithmSpec, k: u32, lambda: f64) -> Result<Vec<FixedPointReport>> {
    if k != 2 {
        return Err(Error::Unsupported(format!("closed-form fixed points are available for k = 2 only, got k = {k}")));
    }
    algorithm.validate()?;
    let c = algorithm.c_delta;
    let mut out = Vec::new();
    match algorithm.kind {
        AlgorithmKind::Sgd | AlgorithmKind::SgdM => {
            let beta = algorithm.effective_beta();
            let sys = tpca_sgdm_system(2, lambda, beta, c)?;
            let cs = c / (1.0 - beta);
            out.push(report(&sys, "origin", [0.0, 0.0])?);
            out.push(report(&sys, "equator", [0.0, cs])?);
            if lambda > cs {
                let m = (lambda - cs).sqrt();
                out.push(report(&sys, "recovery", [m, cs])?);
                out.push(report(&sys, "recovery", [-m, cs])?);
            }
        }
        AlgorithmKind::SgdU => {
            let sys = tpca_sgdu_system(2, lambda, c)?;
            let cd = c / (2.0 * 2f64.sqrt());
            out.push(report(&sys, "equator", [0.0, cd.powf(2.0 / 3.0)])?);
            if lambda > 0.0 {
                let r2 = cd / lambda.sqrt();
                if lambda > r2 {
                    let m = (lambda - r2).sqrt();
                    out.push(report(&sys, "recovery", [m, r2])?);
                    out.push(report(&sys, "recovery", [-m, r2])?);
                }
            }
        }
    }
    Ok(out)
}

/// Fixed point of SGD-M for `f(x) = x`: `(1, c sigma2 / (1 - beta - c))`,
/// which exists for `c_delta < 1 - beta`.
pub fn si_linear_fixed_point(beta: f64, c_delta: f64, sigma2: f64) -> Result<FixedPointReport> {
    let sys = si_sgdm_system_monomial(1, sigma2, beta, c_delta)?;
    if c_delta >= 1.0 - beta {
        return Err(Error::NoSolution(format!("c_delta = {c_delta} must be below 1 - beta = {}", 1.0 - beta)));
    }
    report(&sys, "recovery", [1.0, c_delta * sigma2 / (1.0 - beta - c_delta)])
}

/// Fixed points of SGD-M for `f(x) = x^2`. Below the step-size threshold
/// `(1 - beta)/12` these are `(+-sqrt(1 - r*^2), r*^2)`; above it, the origin
/// and the equatorial roots.
pub fn si_quadratic_fixed_points(beta: f64, c_delta: f64, sigma2: f64) -> Result<Vec<FixedPointReport>> {
    let sys = si_sgdm_system_monomial(2, sigma2, beta, c_delta)?;
    let threshold = (1.0 - beta) / 12.0;
    let mut out = Vec::new();
    if c_delta < threshold {
        let r2 = c_delta * sigma2 / (1.0 - beta - 12.0 * c_delta);
        if r2 >= 1.0 {
            return Err(Error::NoSolution(format!("orthogonal mass {r2} leaves no room for a correlated fixed point")));
        }
        let m = (1.0 - r2).sqrt();
        out.push(report(&sys, "recovery", [m, r2])?);
        out.push(report(&sys, "recovery", [-m, r2])?);
    } else {
        out.push(report(&sys, "origin", [0.0, 0.0])?);
        let ce = c_delta / (1.0 - beta);
        let (a, b, c) = (60.0 * ce, -(24.0 * ce + 6.0), 12.0 * ce + 4.0 * ce * sigma2 + 2.0);
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let s = disc.sqrt();
            let mut roots = vec![(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)];
            roots.dedup();
            for y in roots.into_iter().filter(|&y| y > 0.0) {
                out.push(report(&sys, "equator", [0.0, y])?);
            }
        }
    }
    Ok(out)
}

/// Stability of `(1, 0)` for SGD-M with `f(x) = x^k` and no label noise.
pub fn si_monomial_origin_stability(k: u32, beta: f64, c_delta: f64) -> Result<FixedPointReport> {
    if k == 0 {
        return domain("monomial degree must be at least 1");
    }
    let sys = si_sgdm_system_monomial(k, 0.0, beta, c_delta)?;
    report(&sys, "recovery", [1.0, 0.0])
}

/// Fixed point of normalized SGD for a strictly increasing link without
/// label noise: `m = 1` and orthogonal norm `r = c / (2 sqrt(2/pi))`.
pub fn si_increasing_fixed_point(c_delta: f64) -> Result<FixedPointReport> {
    let sys = crate::limits::si_sgdu_system_increasing(c_delta)?;
    let r = c_delta / (2.0 * (2.0 / std::f64::consts::PI).sqrt());
    report(&sys, "recovery", [1.0, r * r])
}
