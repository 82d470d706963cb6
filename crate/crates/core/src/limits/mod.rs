//! Deterministic and stochastic limit dynamics of the summary `(m, r2)`.

mod integrate;
mod moments;
mod single_index;
mod tensor_pca;

pub use integrate::{endpoint_error_estimate, integrate_ode, integrate_ode_recorded, integrate_sde_em, moment_summary, sde_ensemble_moments, Path, SdeMoments};
pub use moments::{joint_moment, joint_moment_r2};
pub use single_index::{
    evenpoly_f, evenpoly_g, si_sgdm_system_monomial, si_sgdm_system_quadrature, si_sgdu_increasing_drift_checked,
    monomial_generators, quadrature_generators, si_sgdu_system_even, si_sgdu_system_increasing, si_sgdu_system_mc, SiGenerators,
    SiSgduMonteCarlo,
};
pub use tensor_pca::{tpca_sgdm_system, tpca_sgdu_diffusive_system, tpca_sgdu_system, DiffusiveForm};

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::optimizers::AlgorithmKind;

/// `(m, r2)` in the ballistic regime, `(sqrt(n) m, r2)` in the diffusive one.
pub type State = [f64; 2];

pub type VectorField = Arc<dyn Fn(State) -> State + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Ballistic,
    Diffusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    TensorPca,
    SingleIndex,
    Custom,
}

/// Parameters a system was built from, kept for reporting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemParams {
    pub family: Family,
    pub algorithm: Option<AlgorithmKind>,
    pub k: Option<u32>,
    pub lambda: Option<f64>,
    pub link: Option<String>,
    pub beta: f64,
    pub c_delta: f64,
    pub sigma2: Option<f64>,
}

impl SystemParams {
    pub fn custom() -> Self {
        Self { family: Family::Custom, algorithm: None, k: None, lambda: None, link: None, beta: 0.0, c_delta: 0.0, sigma2: None }
    }

    /// `key=value` pairs joined by semicolons.
    pub fn context(&self) -> String {
        let mut parts = vec![format!("family={:?}", self.family).to_lowercase()];
        if let Some(a) = self.algorithm {
            parts.push(format!("algorithm={}", serde_json::to_value(a).unwrap().as_str().unwrap()));
        }
        if let Some(k) = self.k {
            parts.push(format!("k={k}"));
        }
        if let Some(l) = self.lambda {
            parts.push(format!("lambda={l}"));
        }
        if let Some(f) = &self.link {
            parts.push(format!("link={f}"));
        }
        parts.push(format!("beta={}", self.beta));
        parts.push(format!("c_delta={}", self.c_delta));
        if let Some(s) = self.sigma2 {
            parts.push(format!("sigma2={s}"));
        }
        parts.join(";")
    }
}

#[derive(Clone)]
pub struct DynamicsSystem {
    pub name: String,
    pub regime: Regime,
    pub labels: [&'static str; 2],
    pub params: SystemParams,
    drift: VectorField,
    diffusion: Option<VectorField>,
}

impl fmt::Debug for DynamicsSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DynamicsSystem")
            .field("name", &self.name)
            .field("regime", &self.regime)
            .field("params", &self.params)
            .finish()
    }
}

impl DynamicsSystem {
    pub fn ballistic(name: impl Into<String>, params: SystemParams, drift: impl Fn(State) -> State + Send + Sync + 'static) -> Self {
        Self { name: name.into(), regime: Regime::Ballistic, labels: ["m", "r2"], params, drift: Arc::new(drift), diffusion: None }
    }

    /// Diffusion acts on the first coordinate only; the closure returns the
    /// noise coefficient in its first slot.
    pub fn diffusive(
        name: impl Into<String>,
        params: SystemParams,
        drift: impl Fn(State) -> State + Send + Sync + 'static,
        diffusion: impl Fn(State) -> State + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            regime: Regime::Diffusive,
            labels: ["mtilde", "r2"],
            params,
            drift: Arc::new(drift),
            diffusion: Some(Arc::new(diffusion)),
        }
    }

    pub fn drift(&self, u: State) -> State {
        (self.drift)(u)
    }

    pub fn diffusion(&self, u: State) -> State {
        match &self.diffusion {
            Some(d) => d(u),
            None => [0.0, 0.0],
        }
    }

    pub fn has_noise(&self) -> bool {
        self.diffusion.is_some()
    }
}

pub(crate) fn params(family: Family, algorithm: AlgorithmKind, beta: f64, c_delta: f64) -> SystemParams {
    SystemParams { family, algorithm: Some(algorithm), k: None, lambda: None, link: None, beta, c_delta, sigma2: None }
}
