use serde::{Deserialize, Serialize};

use super::{params, DynamicsSystem, Family, State};
use crate::error::{domain, Result};
use crate::optimizers::AlgorithmKind;

fn check(k: u32, lambda: f64, c_delta: f64) -> Result<()> {
    if k < 2 {
        return domain("tensor order must be at least 2");
    }
    if !(lambda >= 0.0) || !(c_delta > 0.0) {
        return domain("need lambda >= 0 and c_delta > 0");
    }
    Ok(())
}

/// Ballistic limit of SGD with momentum `beta` (plain SGD at `beta = 0`).
pub fn tpca_sgdm_system(k: u32, lambda: f64, beta: f64, c_delta: f64) -> Result<DynamicsSystem> {
    check(k, lambda, c_delta)?;
    if !(0.0..1.0).contains(&beta) {
        return domain("momentum must lie in [0, 1)");
    }
    let kf = k as f64;
    let ki = k as i32;
    let mut p = params(Family::TensorPca, if beta == 0.0 { AlgorithmKind::Sgd } else { AlgorithmKind::SgdM }, beta, c_delta);
    p.k = Some(k);
    p.lambda = Some(lambda);
    let one_b = 1.0 - beta;
    Ok(DynamicsSystem::ballistic("tpca_sgdm", p, move |[m, r2]: State| {
        let rr = m * m + r2;
        let rk = rr.powi(ki - 1);
        let dm = 2.0 * m * (lambda * kf * m.powi(ki - 2) - kf * rk) / one_b;
        let dr2 = -(4.0 * kf * rk / (one_b * one_b)) * (r2 * one_b - c_delta);
        [dm, dr2]
    }))
}

/// Ballistic limit of normalized SGD. At the origin the drift is the
/// continuous extension `(0, c_delta)`.
pub fn tpca_sgdu_system(k: u32, lambda: f64, c_delta: f64) -> Result<DynamicsSystem> {
    check(k, lambda, c_delta)?;
    let sk = (k as f64).sqrt();
    let ki = k as i32;
    let mut p = params(Family::TensorPca, AlgorithmKind::SgdU, 0.0, c_delta);
    p.k = Some(k);
    p.lambda = Some(lambda);
    Ok(DynamicsSystem::ballistic("tpca_sgdu", p, move |[m, r2]: State| {
        let rr = (m * m + r2).max(0.0).sqrt();
        if rr == 0.0 {
            return [0.0, c_delta];
        }
        let rk = rr.powi(ki - 1);
        let dm = sk * (lambda * (m / rr).powi(ki - 1) - rk * m);
        let dr2 = -2.0 * sk * rk * r2 + c_delta;
        [dm, dr2]
    }))
}

/// Two ways of writing the near-equator limit of normalized SGD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusiveForm {
    /// Drift scaled by `sqrt(k)` and diffusion `sqrt(c_delta)`; this is the
    /// form consistent with the ballistic normalized-SGD drift and with
    /// direct simulation.
    #[default]
    Rescaled,
    /// Drift `lambda (m/r)^{k-1} 1{k=2} - r^{k-1} m`, diffusion
    /// `sqrt(c_delta ((k-1) m^2/r^2 + 1))`, radial drift `-2 (r^{k+1} - c_delta/2)`.
    Displayed,
}

/// Limit of `(sqrt(n) m, r2)` for normalized SGD started near the equator.
/// Coefficients are evaluated with `r2` floored at `1e-8`.
pub fn tpca_sgdu_diffusive_system(k: u32, lambda: f64, c_delta: f64, form: DiffusiveForm) -> Result<DynamicsSystem> {
    check(k, lambda, c_delta)?;
    let ki = k as i32;
    let kf = k as f64;
    let spike = if k == 2 { lambda } else { 0.0 };
    let mut p = params(Family::TensorPca, AlgorithmKind::SgdU, 0.0, c_delta);
    p.k = Some(k);
    p.lambda = Some(lambda);
    let sys = match form {
        DiffusiveForm::Rescaled => {
            let sk = kf.sqrt();
            DynamicsSystem::diffusive(
                "tpca_sgdu_diffusive",
                p,
                move |[mt, r2]: State| {
                    let r = r2.max(1e-8).sqrt();
                    [sk * (spike * mt / r - r.powi(ki - 1) * mt), -2.0 * sk * r.powi(ki + 1) + c_delta]
                },
                move |_| [c_delta.sqrt(), 0.0],
            )
        }
        DiffusiveForm::Displayed => DynamicsSystem::diffusive(
            "tpca_sgdu_diffusive_displayed",
            p,
            move |[mt, r2]: State| {
                let r = r2.max(1e-8).sqrt();
                [spike * mt / r - r.powi(ki - 1) * mt, -2.0 * (r.powi(ki + 1) - c_delta / 2.0)]
            },
            move |[mt, r2]: State| {
                let r2 = r2.max(1e-8);
                [(c_delta * ((kf - 1.0) * mt * mt / r2 + 1.0)).sqrt(), 0.0]
            },
        ),
    };
    Ok(sys)
}
