use serde::Serialize;

use crate::error::{domain, Result};
use crate::gauss::double_factorial;
use crate::optimizers::AlgorithmKind;

fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        return domain("tensor order must be at least 2");
    }
    Ok(())
}

fn pow0(base: f64, exp: f64) -> f64 {
    if exp == 0.0 {
        1.0
    } else {
        base.powf(exp)
    }
}

/// Signal strength above which SGD-M leaves the equator of the order-`k`
/// tensor PCA limit.
pub fn lambda_crit_sgdm(k: u32, beta: f64, c_delta: f64) -> Result<f64> {
    check_k(k)?;
    if !(0.0..1.0).contains(&beta) || !(c_delta > 0.0) {
        return domain("need beta in [0, 1) and c_delta > 0");
    }
    let kf = k as f64;
    Ok((c_delta / (kf * (1.0 - beta))).powf(kf / 2.0) * (2.0 * (kf - 1.0)).powf(kf - 1.0)
        / pow0(kf - 2.0, (kf - 2.0) / 2.0))
}

/// Same threshold for normalized SGD.
pub fn lambda_crit_sgdu(k: u32, c_delta: f64) -> Result<f64> {
    check_k(k)?;
    if !(c_delta > 0.0) {
        return domain("c_delta must be positive");
    }
    let kf = k as f64;
    let a = c_delta / (2.0 * kf.sqrt());
    let e = (kf - 2.0) * (kf + 1.0) / 2.0;
    let inner = a.powf(kf) * ((kf - 1.0) * (kf + 2.0)).powf(e + kf)
        / ((2.0 * kf).powf(kf) * pow0((kf - 2.0) * (kf + 1.0), e));
    Ok(inner.powf(1.0 / (kf + 1.0)))
}

/// Largest `c_delta` for which `lambda` is supercritical (`k = 2`).
pub fn max_admissible_step(kind: AlgorithmKind, lambda: f64, beta: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return domain("lambda must be positive");
    }
    match kind {
        AlgorithmKind::Sgd => Ok(lambda),
        AlgorithmKind::SgdM => {
            if !(0.0..1.0).contains(&beta) {
                return domain("momentum must lie in [0, 1)");
            }
            Ok(lambda * (1.0 - beta))
        }
        AlgorithmKind::SgdU => Ok((2.0 * lambda).powf(1.5)),
    }
}

/// Step-size constant below which `(1, 0)` is a stable fixed point of SGD-M
/// with `f(x) = x^k` and no label noise.
pub fn si_monomial_cdelta_threshold(k: u32, beta: f64) -> Result<f64> {
    if k == 0 {
        return domain("monomial degree must be at least 1");
    }
    if !(0.0..1.0).contains(&beta) {
        return domain("momentum must lie in [0, 1)");
    }
    let k = k as i64;
    Ok((1.0 - beta) / (k * k) as f64 * double_factorial(2 * k - 3)? / double_factorial(4 * k - 5)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCheck {
    pub ks: Vec<u32>,
    pub thresholds: Vec<f64>,
    /// `(e / (8 (k-1)))^{k-1} / k^2`, times `1 - beta`.
    pub stirling: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Least-squares slope of `log threshold` on `log stirling`.
    pub slope: f64,
    pub strictly_decreasing: bool,
}

/// Compares the step-size threshold with its Stirling approximation over
/// `ks` (all at least 2).
pub fn si_monomial_threshold_decay_check(ks: &[u32], beta: f64) -> Result<DecayCheck> {
    if ks.len() < 2 || ks.iter().any(|&k| k < 2) {
        return domain("need at least two degrees, all >= 2");
    }
    let mut thresholds = Vec::new();
    let mut stirling = Vec::new();
    for &k in ks {
        thresholds.push(si_monomial_cdelta_threshold(k, beta)?);
        let n = (k - 1) as f64;
        stirling.push((1.0 - beta) * (std::f64::consts::E / (8.0 * n)).powf(n) / (k as f64).powi(2));
    }
    let ratios: Vec<f64> = thresholds.iter().zip(&stirling).map(|(a, b)| a / b).collect();
    let xs: Vec<f64> = stirling.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = thresholds.iter().map(|s| s.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let strictly_decreasing = thresholds.windows(2).all(|w| w[1] < w[0]);
    Ok(DecayCheck { ks: ks.to_vec(), thresholds, stirling, ratios, slope: sxy / sxx, strictly_decreasing })
}
