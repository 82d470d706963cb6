use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::DiffusiveForm;
use crate::models::{LinkSpec, ModelSpec, SingleIndexModel, TensorPcaModel};
use crate::optimizers::{AlgorithmKind, AlgorithmSpec, EnsembleSpec, Horizon, InitMode, SimulatorKind};

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpikeConvention {
    #[default]
    FirstBasisVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    TensorPca {
        n: usize,
        k: u32,
        lambda: f64,
        c_delta: f64,
        #[serde(default)]
        spike: SpikeConvention,
    },
    SingleIndex {
        n: usize,
        link: LinkSpec,
        sigma2: f64,
        c_delta: f64,
        #[serde(default)]
        spike: SpikeConvention,
    },
}

impl ModelConfig {
    pub fn n(&self) -> usize {
        match self {
            ModelConfig::TensorPca { n, .. } | ModelConfig::SingleIndex { n, .. } => *n,
        }
    }

    pub fn set_n(&mut self, value: usize) {
        match self {
            ModelConfig::TensorPca { n, .. } | ModelConfig::SingleIndex { n, .. } => *n = value,
        }
    }

    pub fn c_delta(&self) -> f64 {
        match self {
            ModelConfig::TensorPca { c_delta, .. } | ModelConfig::SingleIndex { c_delta, .. } => *c_delta,
        }
    }

    pub fn build(&self) -> Result<ModelSpec> {
        let built = match self {
            ModelConfig::TensorPca { n, k, lambda, .. } => TensorPcaModel::new(*n, *k, *lambda).map(ModelSpec::TensorPca),
            ModelConfig::SingleIndex { n, link, sigma2, .. } => {
                SingleIndexModel::new(*n, link.build()?, *sigma2).map(ModelSpec::SingleIndex)
            }
        };
        built.map_err(|e| Error::Config(e.to_string()))
    }
}

/// Algorithm block. `c_delta` falls back to the model block's value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub kind: AlgorithmKind,
    #[serde(default)]
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_delta: Option<f64>,
}

impl AlgorithmConfig {
    pub fn spec(&self, model_c_delta: f64) -> AlgorithmSpec {
        AlgorithmSpec { kind: self.kind, beta: self.beta, c_delta: self.c_delta.unwrap_or(model_c_delta) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Rescaled time horizon `T`; the run takes `ceil(T n / c_delta)` steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Explicit step count, used instead of `horizon` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    pub replicas: usize,
    pub record_stride: u64,
    pub base_seed: u64,
    #[serde(default)]
    pub init: InitMode,
    #[serde(default)]
    pub simulator: SimulatorKind,
}

impl RunConfig {
    pub fn horizon(&self) -> Result<Horizon> {
        match (self.horizon, self.steps) {
            (Some(t), None) if t > 0.0 && t.is_finite() => Ok(Horizon::Time(t)),
            (None, Some(s)) => Ok(Horizon::Steps(s)),
            _ => config_err("run block needs exactly one of a positive `horizon` or `steps`"),
        }
    }

    pub fn ensemble(&self) -> Result<EnsembleSpec> {
        Ok(EnsembleSpec {
            replicas: self.replicas,
            base_seed: self.base_seed,
            horizon: self.horizon()?,
            record_stride: self.record_stride,
            init: self.init,
            simulator: self.simulator,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub prefix: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitRegime {
    #[default]
    Ballistic,
    Diffusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitConfig {
    #[serde(default)]
    pub regime: LimitRegime,
    /// Initial `(m, r2)`, or `(sqrt(n) m, r2)` in the diffusive regime.
    /// Defaults to the run block's initial law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<[f64; 2]>,
    pub horizon: f64,
    pub step: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default)]
    pub diffusive_form: DiffusiveForm,
    #[serde(default = "default_gh_order")]
    pub gh_order: usize,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
}

fn default_record_every() -> usize {
    10
}
fn default_paths() -> usize {
    2000
}
fn default_gh_order() -> usize {
    40
}
fn default_n_mc() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    pub c_deltas: Vec<f64>,
    /// Kinds and momenta; any `c_delta` here is ignored in favour of `c_deltas`.
    pub algorithms: Vec<AlgorithmConfig>,
    #[serde(default = "default_success")]
    pub success_threshold: f64,
    #[serde(default = "default_near")]
    pub near_threshold_fraction: f64,
}

fn default_success() -> f64 {
    0.5
}
fn default_near() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub algorithms: Vec<AlgorithmConfig>,
    pub run: RunConfig,
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<LimitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn algorithm_specs(&self) -> Vec<AlgorithmSpec> {
        self.algorithms.iter().map(|a| a.spec(self.model.c_delta())).collect()
    }

    pub fn validate(&self) -> Result<()> {
        match &self.model {
            ModelConfig::TensorPca { k, .. } if *k < 2 => return config_err("tensor PCA needs k >= 2"),
            _ => {}
        }
        if self.model.n() < 4 {
            return config_err("dimension n must be at least 4");
        }
        if !(self.model.c_delta() > 0.0) {
            return config_err("c_delta must be positive");
        }
        self.model.build()?;
        if self.algorithms.is_empty() {
            return config_err("at least one algorithm is required");
        }
        for spec in self.algorithm_specs() {
            spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.run.replicas == 0 || self.run.record_stride == 0 {
            return config_err("replicas and record_stride must be positive");
        }
        self.run.horizon()?;
        self.run.init.validate().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(l) = &self.limit {
            if !(l.horizon > 0.0) || !(l.step > 0.0) || l.paths < 2 || l.gh_order == 0 || l.n_mc < 2 {
                return config_err("limit block needs positive horizon/step, paths >= 2, gh_order >= 1, n_mc >= 2");
            }
        }
        if let Some(s) = &self.sweep {
            if s.lambdas.is_empty() || s.c_deltas.is_empty() || s.algorithms.is_empty() {
                return config_err("sweep grid must be non-empty in every axis");
            }
            if s.c_deltas.iter().any(|c| !(*c > 0.0)) || s.lambdas.iter().any(|l| !(*l >= 0.0)) {
                return config_err("sweep needs positive c_deltas and nonnegative lambdas");
            }
            for a in &s.algorithms {
                a.spec(1.0).validate().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }
}
