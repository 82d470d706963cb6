use pyo3::exceptions::{PyNotImplementedError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hdsgd::experiment::{fixed_points_for, limit_system, preset, LimitConfig, LimitRegime, ModelConfig, SpikeConvention, PRESET_NAMES};
use hdsgd::fixed_points::{evenpoly_fixed_point, evenpoly_series, lambda_crit_sgdm, lambda_crit_sgdu, FixedPointReport};
use hdsgd::lemmas::{run_suite, Suite};
use hdsgd::limits::{integrate_ode_recorded, DiffusiveForm};
use hdsgd::models::LinkSpec;
use hdsgd::optimizers::{ensemble_run, AlgorithmKind, AlgorithmSpec, EnsembleSpec, Horizon, InitMode, SimulatorKind};
use hdsgd::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Config(_) | Error::NoSolution(_) => PyValueError::new_err(e.to_string()),
        Error::Unsupported(_) => PyNotImplementedError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A tensor-PCA or single-index model in dimension `n`.
#[pyclass(frozen, module = "hdsgd")]
struct Model {
    config: ModelConfig,
}

#[pymethods]
impl Model {
    #[staticmethod]
    #[pyo3(signature = (n, k, lam))]
    fn tensor_pca(n: usize, k: u32, lam: f64) -> PyResult<Self> {
        let config = ModelConfig::TensorPca { n, k, lambda: lam, c_delta: 1.0, spike: SpikeConvention::FirstBasisVector };
        config.build().map_err(py_err)?;
        Ok(Self { config })
    }

    /// `link` is a monomial degree or a list of polynomial coefficients
    /// `c_0, c_1, ...`.
    #[staticmethod]
    #[pyo3(signature = (n, link, sigma2=0.0))]
    fn single_index(n: usize, link: &Bound<'_, PyAny>, sigma2: f64) -> PyResult<Self> {
        let link = if let Ok(degree) = link.extract::<u32>() {
            LinkSpec::Monomial { degree }
        } else {
            LinkSpec::Polynomial { coefficients: link.extract::<Vec<f64>>()? }
        };
        let config = ModelConfig::SingleIndex { n, link, sigma2, c_delta: 1.0, spike: SpikeConvention::FirstBasisVector };
        config.build().map_err(py_err)?;
        Ok(Self { config })
    }

    #[getter]
    fn n(&self) -> usize {
        self.config.n()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.config).expect("model serializes")
    }

    fn __repr__(&self) -> String {
        format!("Model({})", self.to_json())
    }
}

#[pyclass(frozen, module = "hdsgd")]
struct Algorithm {
    spec: AlgorithmSpec,
}

#[pymethods]
impl Algorithm {
    #[staticmethod]
    fn sgd(c_delta: f64) -> PyResult<Self> {
        Self::checked(AlgorithmSpec::sgd(c_delta))
    }

    #[staticmethod]
    fn momentum(beta: f64, c_delta: f64) -> PyResult<Self> {
        Self::checked(AlgorithmSpec::momentum(beta, c_delta))
    }

    #[staticmethod]
    fn unit(c_delta: f64) -> PyResult<Self> {
        Self::checked(AlgorithmSpec::unit(c_delta))
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.spec.kind {
            AlgorithmKind::Sgd => "sgd",
            AlgorithmKind::SgdM => "sgd_m",
            AlgorithmKind::SgdU => "sgd_u",
        }
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.spec.beta
    }

    #[getter]
    fn c_delta(&self) -> f64 {
        self.spec.c_delta
    }

    fn step_size(&self, n: usize) -> f64 {
        self.spec.step_size(n)
    }

    fn steps_for_horizon(&self, horizon: f64, n: usize) -> u64 {
        self.spec.steps_for_horizon(horizon, n)
    }

    fn __repr__(&self) -> String {
        format!("Algorithm({})", self.spec.tag())
    }
}

impl Algorithm {
    fn checked(spec: AlgorithmSpec) -> PyResult<Self> {
        spec.validate().map_err(py_err)?;
        Ok(Self { spec })
    }
}

fn init_mode(init: Option<(f64, f64)>, radius: f64) -> InitMode {
    match init {
        Some((m0, r2_0)) => InitMode::FixedSummary { m0, r2_0 },
        None => InitMode::UniformSphere { radius },
    }
}

/// Runs `replicas` independent trajectories and returns the ensemble mean
/// trajectory plus per-replica final summaries.
#[pyfunction]
#[pyo3(signature = (model, algorithm, replicas, seed, horizon=None, steps=None, record_stride=100, init=None, radius=1.0, projected=false))]
#[allow(clippy::too_many_arguments)]
fn run_ensemble<'py>(
    py: Python<'py>,
    model: &Model,
    algorithm: &Algorithm,
    replicas: usize,
    seed: u64,
    horizon: Option<f64>,
    steps: Option<u64>,
    record_stride: u64,
    init: Option<(f64, f64)>,
    radius: f64,
    projected: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let horizon = match (horizon, steps) {
        (Some(t), None) => Horizon::Time(t),
        (None, Some(s)) => Horizon::Steps(s),
        _ => return Err(PyValueError::new_err("pass exactly one of horizon or steps")),
    };
    let spec = EnsembleSpec {
        replicas,
        base_seed: seed,
        horizon,
        record_stride,
        init: init_mode(init, radius),
        simulator: if projected { SimulatorKind::Projected } else { SimulatorKind::Full },
    };
    let built = model.config.build().map_err(py_err)?;
    let alg = algorithm.spec;
    let ens = py.detach(|| ensemble_run(&built, &alg, &spec)).map_err(py_err)?;
    let mean = ens.mean_trajectory();
    let out = PyDict::new(py);
    out.set_item("t", mean.t)?;
    out.set_item("m", mean.m)?;
    out.set_item("r2", mean.r2)?;
    out.set_item("m_over_r", mean.m_over_r)?;
    out.set_item("m_over_r_stderr", mean.m_over_r_stderr)?;
    out.set_item("n_active", mean.n_active)?;
    let last: Vec<(f64, f64)> = ens.trajectories.iter().map(|t| (t.last().m, t.last().r2)).collect();
    out.set_item("final", last)?;
    out.set_item("diverged", ens.trajectories.iter().map(|t| t.diverged).collect::<Vec<_>>())?;
    Ok(out)
}

fn ballistic(step: f64, record_every: usize, horizon: f64) -> LimitConfig {
    LimitConfig {
        regime: LimitRegime::Ballistic,
        init: None,
        horizon,
        step,
        record_every,
        paths: 0,
        diffusive_form: DiffusiveForm::Rescaled,
        gh_order: 40,
        n_mc: 100_000,
    }
}

/// Drift `(dm/dt, dr2/dt)` of the ballistic limit at `(m, r2)`.
#[pyfunction]
fn drift(model: &Model, algorithm: &Algorithm, m: f64, r2: f64) -> PyResult<(f64, f64)> {
    let sys = limit_system(&model.config, &algorithm.spec, &ballistic(1e-3, 1, 1.0), 0).map_err(py_err)?;
    let d = sys.drift([m, r2]);
    Ok((d[0], d[1]))
}

/// Integrates the ballistic limit with RK4 from `(m0, r2_0)`.
#[pyfunction]
#[pyo3(signature = (model, algorithm, init, horizon, step=1e-3, record_every=10))]
fn limit_path<'py>(
    py: Python<'py>,
    model: &Model,
    algorithm: &Algorithm,
    init: (f64, f64),
    horizon: f64,
    step: f64,
    record_every: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let sys = limit_system(&model.config, &algorithm.spec, &ballistic(step, record_every, horizon), 0).map_err(py_err)?;
    let path = py.detach(|| integrate_ode_recorded(&sys, [init.0, init.1], horizon, step, record_every)).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("t", path.times)?;
    out.set_item("m", path.states.iter().map(|u| u[0]).collect::<Vec<_>>())?;
    out.set_item("r2", path.states.iter().map(|u| u[1]).collect::<Vec<_>>())?;
    Ok(out)
}

fn report_dict<'py>(py: Python<'py>, r: &FixedPointReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("label", &r.label)?;
    d.set_item("m", r.point[0])?;
    d.set_item("r2", r.point[1])?;
    d.set_item("stability", r.stability.as_str())?;
    d.set_item("eigenvalues", r.eigenvalues.iter().map(|e| (e.re, e.im)).collect::<Vec<_>>())?;
    Ok(d)
}

/// Fixed points of the ballistic limit with their linear stability.
#[pyfunction]
fn fixed_points<'py>(py: Python<'py>, model: &Model, algorithm: &Algorithm) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let reports = fixed_points_for(&model.config, &algorithm.spec).map_err(py_err)?;
    reports.iter().map(|r| report_dict(py, r)).collect()
}

#[pyfunction]
#[pyo3(signature = (k, c_delta, beta=0.0, normalized=false))]
fn lambda_crit(k: u32, c_delta: f64, beta: f64, normalized: bool) -> PyResult<f64> {
    if normalized {
        lambda_crit_sgdu(k, c_delta)
    } else {
        lambda_crit_sgdm(k, beta, c_delta)
    }
    .map_err(py_err)
}

/// Fixed point `(m, r2)` of noise-free normalized SGD with an even link,
/// and its small-step series `(m, r)`.
#[pyfunction]
fn even_link_fixed_point(c_delta: f64) -> PyResult<((f64, f64), (f64, f64))> {
    let p = evenpoly_fixed_point(c_delta, 1.0).map_err(py_err)?;
    Ok(((p[0].point[0], p[0].point[1]), evenpoly_series(c_delta)))
}

/// Runs a Monte Carlo oracle suite (`gaussian`, `generators`, `drift` or
/// `all`) and returns one dict per comparison.
#[pyfunction]
#[pyo3(signature = (suite="all", n_mc=1_000_000, seed=0))]
fn verify<'py>(py: Python<'py>, suite: &str, n_mc: usize, seed: u64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let suite: Suite = suite.parse().map_err(py_err)?;
    let rows = py.detach(|| run_suite(suite, n_mc, seed)).map_err(py_err)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("lemma", &r.lemma)?;
            d.set_item("parameters", &r.parameters)?;
            d.set_item("mc", r.mc)?;
            d.set_item("closed", r.closed)?;
            d.set_item("stderr", r.stderr)?;
            d.set_item("z", r.z)?;
            d.set_item("pass", r.pass)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    PRESET_NAMES.to_vec()
}

#[pyfunction]
fn preset_json(name: &str) -> PyResult<String> {
    Ok(preset(name).map_err(py_err)?.to_json())
}

#[pymodule]
#[pyo3(name = "hdsgd")]
fn hdsgd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_class::<Algorithm>()?;
    m.add_function(wrap_pyfunction!(run_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(drift, m)?)?;
    m.add_function(wrap_pyfunction!(limit_path, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_points, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_crit, m)?)?;
    m.add_function(wrap_pyfunction!(even_link_fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(preset_json, m)?)?;
    Ok(())
}
