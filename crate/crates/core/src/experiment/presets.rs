//! Named configurations: the fig1, fig2 and fig3 runs, the k = 2 sweep and the
//! momentum equivalence check.

use std::path::PathBuf;

use super::config::{
    AlgorithmConfig, ExperimentConfig, LimitConfig, LimitRegime, ModelConfig, OutputConfig, RunConfig, SpikeConvention, SweepConfig,
};
use crate::error::{Error, Result};
use crate::limits::DiffusiveForm;
use crate::models::LinkSpec;
use crate::optimizers::{AlgorithmKind, InitMode, SimulatorKind};

pub const PRESET_NAMES: [&str; 9] =
    ["fig1-left", "fig1-middle", "fig1-right", "fig2", "fig3-quadratic", "fig3-cubic", "fig3-degree7", "sweep-k2", "equivalence"];

/// Desk-scale dimension used by every preset.
pub const DESK_N: usize = 2000;
/// Dimension used with `--full-scale`.
pub const FULL_N: usize = 10_000;

fn alg(kind: AlgorithmKind, beta: f64) -> AlgorithmConfig {
    AlgorithmConfig { kind, beta, c_delta: None }
}

fn fig1_algorithms() -> Vec<AlgorithmConfig> {
    vec![
        alg(AlgorithmKind::Sgd, 0.0),
        alg(AlgorithmKind::SgdM, 0.5),
        alg(AlgorithmKind::SgdM, 0.9),
        alg(AlgorithmKind::SgdU, 0.0),
    ]
}

fn output(prefix: &str) -> OutputConfig {
    OutputConfig { directory: PathBuf::from("out"), prefix: prefix.into() }
}

fn tpca(n: usize, lambda: f64, c_delta: f64) -> ModelConfig {
    ModelConfig::TensorPca { n, k: 2, lambda, c_delta, spike: SpikeConvention::FirstBasisVector }
}

fn fig1(lambda: f64, prefix: &str) -> ExperimentConfig {
    ExperimentConfig {
        model: tpca(DESK_N, lambda, 1.0),
        algorithms: fig1_algorithms(),
        run: RunConfig {
            horizon: Some(20.0),
            steps: None,
            replicas: 20,
            record_stride: 200,
            base_seed: 1,
            init: InitMode::UniformSphere { radius: 1.0 },
            simulator: SimulatorKind::Full,
        },
        output: output(prefix),
        limit: Some(LimitConfig {
            regime: LimitRegime::Ballistic,
            init: None,
            horizon: 20.0,
            step: 1e-3,
            record_every: 100,
            paths: 2000,
            diffusive_form: DiffusiveForm::Rescaled,
            gh_order: 40,
            n_mc: 100_000,
        }),
        sweep: None,
    }
}

fn fig2() -> ExperimentConfig {
    let mut cfg = fig1(0.8, "fig2");
    cfg.algorithms = vec![alg(AlgorithmKind::SgdU, 0.0)];
    cfg.run.horizon = Some(6.0);
    cfg.run.record_stride = 100;
    cfg.limit = Some(LimitConfig {
        regime: LimitRegime::Diffusive,
        init: None,
        horizon: 6.0,
        step: 1e-3,
        record_every: 100,
        paths: 2000,
        diffusive_form: DiffusiveForm::Rescaled,
        gh_order: 40,
        n_mc: 100_000,
    });
    cfg
}

/// Single-index runs. SGD-U uses `c_delta = 0.1` throughout; SGD gets the
/// largest power of ten that does not blow up.
fn fig3(link: LinkSpec, sgd_c_delta: f64, prefix: &str) -> ExperimentConfig {
    ExperimentConfig {
        model: ModelConfig::SingleIndex { n: DESK_N, link, sigma2: 0.01, c_delta: 0.1, spike: SpikeConvention::FirstBasisVector },
        algorithms: vec![
            AlgorithmConfig { kind: AlgorithmKind::Sgd, beta: 0.0, c_delta: Some(sgd_c_delta) },
            alg(AlgorithmKind::SgdU, 0.0),
        ],
        run: RunConfig {
            horizon: None,
            steps: Some(200_000),
            replicas: 4,
            record_stride: 1000,
            base_seed: 3,
            init: InitMode::UniformSphere { radius: 1.0 },
            simulator: SimulatorKind::Full,
        },
        output: output(prefix),
        limit: None,
        sweep: None,
    }
}

fn sweep_k2() -> ExperimentConfig {
    let mut cfg = fig1(1.0, "sweep_k2");
    cfg.algorithms = vec![alg(AlgorithmKind::Sgd, 0.0), alg(AlgorithmKind::SgdU, 0.0)];
    cfg.run.replicas = 8;
    cfg.run.record_stride = 2000;
    cfg.run.simulator = SimulatorKind::Projected;
    cfg.limit = None;
    cfg.sweep = Some(SweepConfig {
        lambdas: (3..=15).map(|i| i as f64 / 10.0).collect(),
        c_deltas: vec![1.0],
        algorithms: cfg.algorithms.clone(),
        success_threshold: 0.5,
        near_threshold_fraction: 0.1,
    });
    cfg
}

fn equivalence() -> ExperimentConfig {
    let mut cfg = fig1(2.0, "equivalence");
    cfg.algorithms = vec![alg(AlgorithmKind::SgdM, 0.5)];
    cfg.model = tpca(DESK_N, 2.0, 0.5);
    cfg.run.init = InitMode::FixedSummary { m0: 0.3, r2_0: 0.9 };
    cfg.run.horizon = Some(10.0);
    cfg.run.replicas = 40;
    cfg.limit = None;
    cfg
}

/// Looks up a preset by name at desk scale.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let cfg = match name {
        "fig1-left" => fig1(0.8, "fig1_left"),
        "fig1-middle" => fig1(1.2, "fig1_middle"),
        "fig1-right" => fig1(2.2, "fig1_right"),
        "fig2" => fig2(),
        "fig3-quadratic" => fig3(LinkSpec::Monomial { degree: 2 }, 1e-2, "fig3_quadratic"),
        "fig3-cubic" => fig3(LinkSpec::Monomial { degree: 3 }, 1e-3, "fig3_cubic"),
        "fig3-degree7" => fig3(LinkSpec::Polynomial { coefficients: vec![0.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 1.0] }, 1e-10, "fig3_degree7"),
        "sweep-k2" => sweep_k2(),
        "equivalence" => equivalence(),
        other => return Err(Error::Config(format!("unknown preset `{other}`; known: {}", PRESET_NAMES.join(", ")))),
    };
    Ok(cfg)
}

/// Switches a configuration to full scale: `n = 10^4`, and `10^6` steps
/// for step-count runs.
pub fn to_full_scale(cfg: &mut ExperimentConfig) {
    cfg.model.set_n(FULL_N);
    if cfg.run.steps.is_some() {
        cfg.run.steps = Some(1_000_000);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_preset_is_config_error() {
        assert!(matches!(preset("fig9"), Err(Error::Config(_))));
    }

    #[test]
    fn full_scale_bumps_dimension_and_steps() {
        let mut cfg = preset("fig3-degree7").unwrap();
        to_full_scale(&mut cfg);
        assert_eq!(cfg.model.n(), FULL_N);
        assert_eq!(cfg.run.steps, Some(1_000_000));
        let mut cfg = preset("fig1-left").unwrap();
        to_full_scale(&mut cfg);
        assert_eq!(cfg.run.horizon, Some(20.0));
    }
}
