//! Library side of the CLI subcommands. Each command returns structured
//! results and writes its CSV artifacts; `main.rs` only maps them to exit
//! codes.

use std::path::{Path as FsPath, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::config::{ExperimentConfig, LimitConfig, LimitRegime, ModelConfig};
use super::csv::{Cell, Table};
use crate::error::{Error, Result};
use crate::fixed_points::{
    evenpoly_fixed_point, lambda_crit_sgdm, lambda_crit_sgdu, si_increasing_fixed_point, si_linear_fixed_point,
    si_monomial_origin_stability, si_quadratic_fixed_points, tpca_fixed_points, FixedPointReport,
};
use crate::lemmas::{run_suite, LemmaCheck, Suite};
use crate::limits::{
    integrate_ode_recorded, sde_ensemble_moments, si_sgdm_system_monomial, si_sgdm_system_quadrature, si_sgdu_system_even,
    si_sgdu_system_increasing, si_sgdu_system_mc, tpca_sgdm_system, tpca_sgdu_diffusive_system, tpca_sgdu_system, DynamicsSystem,
    Path, SdeMoments, State,
};
use crate::models::LinkFunction;
use crate::optimizers::{ensemble_run, AlgorithmKind, AlgorithmSpec, Ensemble, Horizon, InitMode, MeanTrajectory};
use crate::rng::RngStream;

fn out_path(cfg: &ExperimentConfig, suffix: &str) -> PathBuf {
    cfg.output.directory.join(format!("{}_{suffix}.csv", cfg.output.prefix))
}

// ---------------------------------------------------------------- simulate

pub struct SimulateOutput {
    pub ensembles: Vec<Ensemble>,
    pub files: Vec<PathBuf>,
}

pub fn mean_table(mean: &MeanTrajectory) -> Table {
    let mut t = Table::new(&["t", "m", "r2", "m_over_R", "m_over_R_stderr", "n_active"]);
    for i in 0..mean.t.len() {
        t.push(vec![
            Cell::F(mean.t[i]),
            Cell::F(mean.m[i]),
            Cell::F(mean.r2[i]),
            Cell::F(mean.m_over_r[i]),
            Cell::F(mean.m_over_r_stderr[i]),
            Cell::U(mean.n_active[i] as u64),
        ]);
    }
    t
}

/// Runs every configured algorithm and writes, per algorithm tag, one CSV per
/// replica, the ensemble mean and a per-replica summary carrying the
/// divergence flag.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<SimulateOutput> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let ens_spec = cfg.run.ensemble()?;
    let mut out = SimulateOutput { ensembles: Vec::new(), files: Vec::new() };
    for alg in cfg.algorithm_specs() {
        let ens = ensemble_run(&model, &alg, &ens_spec)?;
        let tag = alg.tag();
        let mut summary =
            Table::new(&["replica", "seed", "stream", "final_t", "final_m", "final_r2", "final_m_over_R", "diverged", "skipped_steps"]);
        for (i, (tr, stream)) in ens.trajectories.iter().zip(&ens.streams).enumerate() {
            let mut t = Table::new(&["t", "m", "r2", "m_over_R"]);
            for p in &tr.points {
                t.push(vec![Cell::F(p.t), Cell::F(p.m), Cell::F(p.r2), Cell::F(p.m_over_r())]);
            }
            let path = out_path(cfg, &format!("{tag}_replica{i:03}"));
            t.write(&path)?;
            out.files.push(path);
            let last = tr.last();
            summary.push(vec![
                Cell::U(i as u64),
                Cell::U(stream.seed),
                Cell::U(stream.stream_id),
                Cell::F(last.t),
                Cell::F(last.m),
                Cell::F(last.r2),
                Cell::F(last.m_over_r()),
                Cell::B(tr.diverged),
                Cell::U(tr.skipped_steps),
            ]);
        }
        let path = out_path(cfg, &format!("{tag}_mean"));
        mean_table(&ens.mean_trajectory()).write(&path)?;
        out.files.push(path);
        let path = out_path(cfg, &format!("{tag}_summary"));
        summary.write(&path)?;
        out.files.push(path);
        out.ensembles.push(ens);
    }
    Ok(out)
}

// ------------------------------------------------------------------- limit

fn unsupported<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Unsupported(msg.into()))
}

/// Maps a (model, algorithm, regime) triple to its registered limit system.
/// `seed` feeds the Monte Carlo drift when one is needed.
pub fn limit_system(model: &ModelConfig, alg: &AlgorithmSpec, limit: &LimitConfig, seed: u64) -> Result<DynamicsSystem> {
    let c = alg.c_delta;
    let beta = alg.effective_beta();
    match (model, alg.kind, limit.regime) {
        (ModelConfig::TensorPca { k, lambda, .. }, AlgorithmKind::Sgd | AlgorithmKind::SgdM, LimitRegime::Ballistic) => {
            tpca_sgdm_system(*k, *lambda, beta, c)
        }
        (ModelConfig::TensorPca { k, lambda, .. }, AlgorithmKind::SgdU, LimitRegime::Ballistic) => tpca_sgdu_system(*k, *lambda, c),
        (ModelConfig::TensorPca { k, lambda, .. }, AlgorithmKind::SgdU, LimitRegime::Diffusive) => {
            tpca_sgdu_diffusive_system(*k, *lambda, c, limit.diffusive_form)
        }
        (ModelConfig::SingleIndex { link, sigma2, .. }, AlgorithmKind::Sgd | AlgorithmKind::SgdM, LimitRegime::Ballistic) => {
            match link.build()? {
                LinkFunction::Monomial(k) => si_sgdm_system_monomial(k, *sigma2, beta, c),
                f => si_sgdm_system_quadrature(f, *sigma2, beta, c, limit.gh_order),
            }
        }
        (ModelConfig::SingleIndex { link, sigma2, .. }, AlgorithmKind::SgdU, LimitRegime::Ballistic) => {
            let f = link.build()?;
            if *sigma2 == 0.0 && f.is_strictly_increasing() {
                si_sgdu_system_increasing(c)
            } else if *sigma2 == 0.0 && f.is_even() {
                si_sgdu_system_even(c)
            } else {
                let mut rng = RngStream::new(seed, u64::MAX).generator();
                Ok(si_sgdu_system_mc(f, *sigma2, c, limit.n_mc, &mut rng)?.system())
            }
        }
        (m, kind, regime) => unsupported(format!(
            "no {regime:?} limit registered for {} with {kind:?}",
            match m {
                ModelConfig::TensorPca { .. } => "tensor PCA",
                ModelConfig::SingleIndex { .. } => "single-index",
            }
        )),
    }
}

/// Ballistic initial state implied by the run block: the fixed summary, or
/// for a uniform start the mean overlap `E|m0| = radius sqrt(2/(pi n))`
/// with `r2 = radius^2 - m0^2`.
pub fn default_limit_init(cfg: &ExperimentConfig) -> State {
    let n = cfg.model.n() as f64;
    match cfg.run.init {
        InitMode::FixedSummary { m0, r2_0 } => [m0, r2_0],
        InitMode::UniformSphere { radius } => {
            let m0 = radius * (2.0 / (std::f64::consts::PI * n)).sqrt();
            [m0, radius * radius - m0 * m0]
        }
    }
}

pub enum LimitResult {
    Ode(Path),
    Sde(SdeMoments),
}

pub struct LimitOutput {
    pub results: Vec<(AlgorithmSpec, LimitResult)>,
    pub files: Vec<PathBuf>,
}

pub fn ode_table(path: &Path) -> Table {
    let mut t = Table::new(&["t", "m", "r2"]);
    for (ti, u) in path.times.iter().zip(&path.states) {
        t.push(vec![Cell::F(*ti), Cell::F(u[0]), Cell::F(u[1])]);
    }
    t
}

pub fn sde_table(mom: &SdeMoments) -> Table {
    let mut t = Table::new(&["t", "mean_mtilde", "var_mtilde", "r2"]);
    for i in 0..mom.t.len() {
        t.push(vec![Cell::F(mom.t[i]), Cell::F(mom.mean_m[i]), Cell::F(mom.var_m[i]), Cell::F(mom.mean_r2[i])]);
    }
    t
}

/// Integrates the limit of every configured algorithm. Algorithms without a
/// registered limit in the requested regime are a configuration error.
pub fn cmd_limit(cfg: &ExperimentConfig) -> Result<LimitOutput> {
    cfg.validate()?;
    let limit = cfg.limit.as_ref().ok_or_else(|| Error::Config("the `limit` command needs a `limit` block".into()))?;
    let mut out = LimitOutput { results: Vec::new(), files: Vec::new() };
    for alg in cfg.algorithm_specs() {
        let sys = limit_system(&cfg.model, &alg, limit, cfg.run.base_seed)?;
        let tag = alg.tag();
        let (res, table) = match limit.regime {
            LimitRegime::Ballistic => {
                let u0 = limit.init.unwrap_or_else(|| default_limit_init(cfg));
                let p = integrate_ode_recorded(&sys, u0, limit.horizon, limit.step, limit.record_every)?;
                let t = ode_table(&p);
                (LimitResult::Ode(p), t)
            }
            LimitRegime::Diffusive => {
                let fixed = limit.init.or(match cfg.run.init {
                    InitMode::FixedSummary { m0, r2_0 } => Some([m0 * (cfg.model.n() as f64).sqrt(), r2_0]),
                    InitMode::UniformSphere { .. } => None,
                });
                let radius = match cfg.run.init {
                    InitMode::UniformSphere { radius } => radius,
                    InitMode::FixedSummary { .. } => 0.0,
                };
                let init = move |rng: &mut crate::rng::StreamRng| -> State {
                    fixed.unwrap_or_else(|| {
                        let z: f64 = rng.sample(StandardNormal);
                        [radius * z, radius * radius]
                    })
                };
                let dt = limit.step * limit.record_every as f64;
                let count = (limit.horizon / dt).round() as usize;
                let times: Vec<f64> = (0..=count).map(|j| (j as f64 * dt).min(limit.horizon)).collect();
                let mom = sde_ensemble_moments(&sys, init, limit.paths, limit.horizon, limit.step, &times, cfg.run.base_seed)?;
                let t = sde_table(&mom);
                (LimitResult::Sde(mom), t)
            }
        };
        let path = out_path(cfg, &format!("{tag}_limit"));
        table.write(&path)?;
        out.files.push(path);
        out.results.push((alg, res));
    }
    Ok(out)
}

// ----------------------------------------------------------------- compare

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub sup_norm_m_over_r: f64,
    pub sup_norm_r2: f64,
    pub grid: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// A summary curve `t -> (|m/R|, r2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub t: Vec<f64>,
    pub m_over_r: Vec<f64>,
    pub r2: Vec<f64>,
}

impl Curve {
    pub fn from_mean(mean: &MeanTrajectory) -> Self {
        Self { t: mean.t.clone(), m_over_r: mean.m_over_r.clone(), r2: mean.r2.clone() }
    }

    pub fn from_path(path: &Path) -> Self {
        Self {
            t: path.times.clone(),
            m_over_r: path.states.iter().map(|u| ratio(u[0], u[1])).collect(),
            r2: path.states.iter().map(|u| u[1]).collect(),
        }
    }

    /// Reads either a simulation CSV (with `m_over_R`) or an ODE CSV
    /// (`t,m,r2`).
    pub fn read(path: &FsPath) -> Result<Self> {
        let t = Table::read(path)?;
        let time = t.column("t")?;
        let r2 = t.column("r2")?;
        let m_over_r = if t.has_column("m_over_R") {
            t.column("m_over_R")?
        } else {
            t.column("m")?.iter().zip(&r2).map(|(&m, &r)| ratio(m, r)).collect()
        };
        if time.is_empty() || time.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config(format!("{}: times must be non-empty and increasing", path.display())));
        }
        Ok(Self { t: time, m_over_r, r2 })
    }

    fn interp(&self, ys: &[f64], t: f64) -> f64 {
        let n = self.t.len();
        if n == 1 || t <= self.t[0] {
            return ys[0];
        }
        if t >= self.t[n - 1] {
            return ys[n - 1];
        }
        let i = self.t.partition_point(|&s| s <= t) - 1;
        let w = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
        ys[i] + w * (ys[i + 1] - ys[i])
    }
}

fn ratio(m: f64, r2: f64) -> f64 {
    let rr = (m * m + r2.max(0.0)).sqrt();
    if rr > 0.0 {
        m.abs() / rr
    } else {
        0.0
    }
}

/// Sup-norm distances after interpolating both curves onto the union of
/// their time points inside the overlap. Disjoint ranges are an error.
pub fn compare_curves(a: &Curve, b: &Curve, tolerance: f64) -> Result<ComparisonReport> {
    let lo = a.t[0].max(b.t[0]);
    let hi = a.t[a.t.len() - 1].min(b.t[b.t.len() - 1]);
    if lo > hi {
        return Err(Error::Config(format!("time ranges do not overlap ([{lo}, {hi}])")));
    }
    let mut grid: Vec<f64> = a.t.iter().chain(&b.t).copied().filter(|&t| t >= lo && t <= hi).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let (mut dm, mut dr): (f64, f64) = (0.0, 0.0);
    for &t in &grid {
        dm = dm.max((a.interp(&a.m_over_r, t) - b.interp(&b.m_over_r, t)).abs());
        dr = dr.max((a.interp(&a.r2, t) - b.interp(&b.r2, t)).abs());
    }
    Ok(ComparisonReport { sup_norm_m_over_r: dm, sup_norm_r2: dr, pass: dm <= tolerance && dr <= tolerance, grid, tolerance })
}

pub fn cmd_compare(sim: &FsPath, limit: &FsPath, tolerance: f64) -> Result<ComparisonReport> {
    compare_curves(&Curve::read(sim)?, &Curve::read(limit)?, tolerance)
}

// ------------------------------------------------------------- equivalence

#[derive(Debug, Clone)]
pub struct EquivalenceOutput {
    pub momentum: AlgorithmSpec,
    pub plain: AlgorithmSpec,
    pub steps: u64,
    pub report: ComparisonReport,
}

/// Runs SGD-M(`beta`, `c_delta`) and SGD(`c_delta / (1 - beta)`) for the
/// same number of iterations with paired streams, and compares the mean
/// summaries index by index. The momentum run's time grid labels the result.
pub fn cmd_equivalence(cfg: &ExperimentConfig, beta: f64, c_delta: f64, tolerance: f64) -> Result<EquivalenceOutput> {
    cfg.validate()?;
    if !(0.0..1.0).contains(&beta) || !(c_delta > 0.0) {
        return Err(Error::Config(format!("need beta in [0, 1) and c_delta > 0, got beta = {beta}, c_delta = {c_delta}")));
    }
    let model = cfg.model.build()?;
    let momentum = if beta == 0.0 { AlgorithmSpec::sgd(c_delta) } else { AlgorithmSpec::momentum(beta, c_delta) };
    let plain = AlgorithmSpec::sgd(c_delta / (1.0 - beta));
    let mut spec = cfg.run.ensemble()?;
    let steps = spec.horizon.steps(&momentum, model.dim());
    spec.horizon = Horizon::Steps(steps);
    let a = ensemble_run(&model, &momentum, &spec)?.mean_trajectory();
    let b = ensemble_run(&model, &plain, &spec)?.mean_trajectory();
    let mut ca = Curve::from_mean(&a);
    let mut cb = Curve::from_mean(&b);
    // Iteration indexing: put both on the momentum run's clock.
    ca.t = a.step.iter().map(|&s| s as f64 * momentum.step_size(model.dim())).collect();
    cb.t = b.step.iter().map(|&s| s as f64 * momentum.step_size(model.dim())).collect();
    let report = compare_curves(&ca, &cb, tolerance)?;
    let mut t = Table::new(&["t", "m_over_R_momentum", "m_over_R_plain", "r2_momentum", "r2_plain"]);
    for i in 0..ca.t.len().min(cb.t.len()) {
        t.push(vec![Cell::F(ca.t[i]), Cell::F(ca.m_over_r[i]), Cell::F(cb.m_over_r[i]), Cell::F(ca.r2[i]), Cell::F(cb.r2[i])]);
    }
    t.write(&out_path(cfg, &format!("equivalence_{}_vs_{}", momentum.tag(), plain.tag())))?;
    Ok(EquivalenceOutput { momentum, plain, steps, report })
}

// ------------------------------------------------------------ fixed points

/// Fixed points of the configured limit for one algorithm.
pub fn fixed_points_for(model: &ModelConfig, alg: &AlgorithmSpec) -> Result<Vec<FixedPointReport>> {
    let beta = alg.effective_beta();
    let c = alg.c_delta;
    match (model, alg.kind) {
        (ModelConfig::TensorPca { k, lambda, .. }, _) => tpca_fixed_points(alg, *k, *lambda),
        (ModelConfig::SingleIndex { link, sigma2, .. }, AlgorithmKind::Sgd | AlgorithmKind::SgdM) => match link.build()? {
            LinkFunction::Monomial(1) => Ok(vec![si_linear_fixed_point(beta, c, *sigma2)?]),
            LinkFunction::Monomial(2) => si_quadratic_fixed_points(beta, c, *sigma2),
            LinkFunction::Monomial(k) if *sigma2 == 0.0 => Ok(vec![si_monomial_origin_stability(k, beta, c)?]),
            f => unsupported(format!("no fixed-point analysis for SGD-M with link {} and sigma2 = {sigma2}", f.name())),
        },
        (ModelConfig::SingleIndex { link, sigma2, .. }, AlgorithmKind::SgdU) => {
            let f = link.build()?;
            if *sigma2 != 0.0 {
                unsupported("normalized-SGD fixed points are available without label noise only")
            } else if f.is_strictly_increasing() {
                Ok(vec![si_increasing_fixed_point(c)?])
            } else if f.is_even() {
                evenpoly_fixed_point(c, 1.0)
            } else {
                unsupported(format!("no fixed-point analysis for SGD-U with link {}", f.name()))
            }
        }
    }
}

pub fn fixed_point_table(rows: &[(AlgorithmSpec, FixedPointReport)]) -> Table {
    let mut t = Table::new(&["m", "r2", "stability", "context"]);
    for (alg, r) in rows {
        let e = r.eigenvalues;
        t.push(vec![
            Cell::F(r.point[0]),
            Cell::F(r.point[1]),
            Cell::S(r.stability.as_str().into()),
            Cell::S(format!(
                "algorithm={};label={};eig=({:.6e}{:+.6e}i {:.6e}{:+.6e}i);{}",
                alg.tag(),
                r.label,
                e[0].re,
                e[0].im,
                e[1].re,
                e[1].im,
                r.context
            )),
        ]);
    }
    t
}

pub fn cmd_fixed_points(cfg: &ExperimentConfig) -> Result<(Vec<(AlgorithmSpec, FixedPointReport)>, PathBuf)> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for alg in cfg.algorithm_specs() {
        for r in fixed_points_for(&cfg.model, &alg)? {
            rows.push((alg, r));
        }
    }
    let path = out_path(cfg, "fixed_points");
    fixed_point_table(&rows).write(&path)?;
    Ok((rows, path))
}

// ------------------------------------------------------------------ verify

pub fn lemma_table(rows: &[LemmaCheck]) -> Table {
    let mut t = Table::new(&["lemma", "parameters", "mc", "closed", "stderr", "z", "pass"]);
    for r in rows {
        t.push(vec![
            Cell::S(r.lemma.clone()),
            Cell::S(r.parameters.clone()),
            Cell::F(r.mc),
            Cell::F(r.closed),
            Cell::F(r.stderr),
            Cell::F(r.z),
            Cell::B(r.pass),
        ]);
    }
    t
}

pub fn cmd_verify(suite: Suite, n_mc: usize, seed: u64, out_dir: &FsPath) -> Result<(Vec<LemmaCheck>, PathBuf)> {
    let rows = run_suite(suite, n_mc, seed)?;
    let name = format!("{suite:?}").to_lowercase();
    let path = out_dir.join(format!("verify_{name}.csv"));
    lemma_table(&rows).write(&path)?;
    Ok((rows, path))
}

// ------------------------------------------------------------------- sweep

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub algorithm: AlgorithmSpec,
    pub lambda: f64,
    pub mean_final_m_over_r: f64,
    pub stderr: f64,
    pub diverged: usize,
    pub success: bool,
    pub lambda_crit: f64,
    pub predicted_supercritical: bool,
    pub near_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bracket {
    pub algorithm: AlgorithmSpec,
    pub lambda_crit: f64,
    /// Last failing `lambda` below the first `lambda` from which every cell
    /// succeeds; `None` when the sweep never fails or never succeeds.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl Bracket {
    pub fn contains(&self, x: f64) -> bool {
        matches!((self.lo, self.hi), (Some(lo), Some(hi)) if lo <= x && x <= hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub brackets: Vec<Bracket>,
    /// Fraction of cells away from the threshold whose outcome matches the
    /// `lambda > lambda_crit` prediction.
    pub agreement_rate: f64,
    pub scored_cells: usize,
}

fn bracket(alg: AlgorithmSpec, lambda_crit: f64, cells: &[&SweepCell]) -> Bracket {
    let mut sorted: Vec<&&SweepCell> = cells.iter().collect();
    sorted.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let first_stable = sorted.iter().rposition(|c| !c.success).map_or(0, |i| i + 1);
    let hi = sorted.get(first_stable).map(|c| c.lambda);
    let lo = first_stable.checked_sub(1).map(|i| sorted[i].lambda);
    Bracket { algorithm: alg, lambda_crit, lo, hi }
}

/// Phase table over `(algorithm, c_delta, lambda)` for tensor PCA.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<(SweepReport, Vec<PathBuf>)> {
    cfg.validate()?;
    let sweep = cfg.sweep.as_ref().ok_or_else(|| Error::Config("the `sweep` command needs a `sweep` block".into()))?;
    let ModelConfig::TensorPca { k, .. } = cfg.model else {
        return Err(Error::Config("sweeps are defined for tensor PCA".into()));
    };
    let ens_spec = cfg.run.ensemble()?;
    let mut cells = Vec::new();
    let mut groups = Vec::new();
    for a in &sweep.algorithms {
        for &c in &sweep.c_deltas {
            let alg = AlgorithmSpec { kind: a.kind, beta: a.beta, c_delta: c };
            let crit = match alg.kind {
                AlgorithmKind::SgdU => lambda_crit_sgdu(k, c)?,
                _ => lambda_crit_sgdm(k, alg.effective_beta(), c)?,
            };
            let start = cells.len();
            for &lambda in &sweep.lambdas {
                let mut model_cfg = cfg.model.clone();
                if let ModelConfig::TensorPca { lambda: l, c_delta, .. } = &mut model_cfg {
                    *l = lambda;
                    *c_delta = c;
                }
                let ens = ensemble_run(&model_cfg.build()?, &alg, &ens_spec)?;
                let (mean, se) = ens.final_m_over_r();
                cells.push(SweepCell {
                    algorithm: alg,
                    lambda,
                    mean_final_m_over_r: mean,
                    stderr: se,
                    diverged: ens.diverged_count(),
                    success: mean > sweep.success_threshold,
                    lambda_crit: crit,
                    predicted_supercritical: lambda > crit,
                    near_threshold: (lambda - crit).abs() <= sweep.near_threshold_fraction * crit + 1e-12,
                });
            }
            groups.push((alg, crit, start..cells.len()));
        }
    }
    let brackets = groups
        .iter()
        .map(|(alg, crit, range)| bracket(*alg, *crit, &cells[range.clone()].iter().collect::<Vec<_>>()))
        .collect();
    let scored: Vec<&SweepCell> = cells.iter().filter(|c| !c.near_threshold).collect();
    let agree = scored.iter().filter(|c| c.success == c.predicted_supercritical).count();
    let agreement_rate = if scored.is_empty() { f64::NAN } else { agree as f64 / scored.len() as f64 };
    let report = SweepReport { scored_cells: scored.len(), cells, brackets, agreement_rate };

    let mut t = Table::new(&[
        "algorithm",
        "beta",
        "c_delta",
        "lambda",
        "mean_final_m_over_R",
        "stderr",
        "diverged",
        "success",
        "lambda_crit",
        "predicted_supercritical",
        "near_threshold",
    ]);
    for c in &report.cells {
        t.push(vec![
            Cell::S(format!("{:?}", c.algorithm.kind).to_lowercase()),
            Cell::F(c.algorithm.beta),
            Cell::F(c.algorithm.c_delta),
            Cell::F(c.lambda),
            Cell::F(c.mean_final_m_over_r),
            Cell::F(c.stderr),
            Cell::U(c.diverged as u64),
            Cell::B(c.success),
            Cell::F(c.lambda_crit),
            Cell::B(c.predicted_supercritical),
            Cell::B(c.near_threshold),
        ]);
    }
    let cells_path = out_path(cfg, "sweep");
    t.write(&cells_path)?;
    let mut b = Table::new(&["algorithm", "beta", "c_delta", "lambda_crit", "bracket_lo", "bracket_hi", "contains_threshold"]);
    for br in &report.brackets {
        b.push(vec![
            Cell::S(format!("{:?}", br.algorithm.kind).to_lowercase()),
            Cell::F(br.algorithm.beta),
            Cell::F(br.algorithm.c_delta),
            Cell::F(br.lambda_crit),
            Cell::F(br.lo.unwrap_or(f64::NAN)),
            Cell::F(br.hi.unwrap_or(f64::NAN)),
            Cell::B(br.contains(br.lambda_crit)),
        ]);
    }
    let br_path = out_path(cfg, "sweep_brackets");
    b.write(&br_path)?;
    Ok((report, vec![cells_path, br_path]))
}
