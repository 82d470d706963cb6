use hdsgd::experiment::{cmd_equivalence, cmd_limit, cmd_simulate, cmd_sweep, compare_curves, preset, Curve, ExperimentConfig, LimitResult};
use hdsgd::gauss::RunningStats;
use hdsgd::models::{LinkFunction, ModelSpec, SingleIndexModel, TensorPcaModel};
use hdsgd::optimizers::{ensemble_run, AlgorithmKind, AlgorithmSpec, Ensemble, EnsembleSpec, Horizon, InitMode, SimulatorKind};

fn in_tempdir(mut cfg: ExperimentConfig, dir: &tempfile::TempDir) -> ExperimentConfig {
    cfg.output.directory = dir.path().to_path_buf();
    cfg
}

/// Per-record mean and standard error of `m` and `r2` across replicas.
fn moments(e: &Ensemble) -> Vec<[RunningStats; 2]> {
    let len = e.trajectories[0].points.len();
    (0..len)
        .map(|j| {
            let mut s = [RunningStats::new(); 2];
            for tr in &e.trajectories {
                s[0].push(tr.points[j].m);
                s[1].push(tr.points[j].r2);
            }
            s
        })
        .collect()
}

#[test]
fn projected_simulator_matches_full_iterates() {
    let n = 200;
    let cases: Vec<(&str, ModelSpec, AlgorithmSpec)> = vec![
        ("tpca k=2 SGD-M", ModelSpec::TensorPca(TensorPcaModel::new(n, 2, 1.5).unwrap()), AlgorithmSpec::momentum(0.5, 0.5)),
        ("tpca k=3 SGD-U", ModelSpec::TensorPca(TensorPcaModel::new(n, 3, 2.0).unwrap()), AlgorithmSpec::unit(1.0)),
        (
            "single-index x^2 SGD-U",
            ModelSpec::SingleIndex(SingleIndexModel::new(n, LinkFunction::Monomial(2), 0.01).unwrap()),
            AlgorithmSpec::unit(0.2),
        ),
    ];
    for (name, model, alg) in cases {
        let spec = |simulator, base_seed| EnsembleSpec {
            replicas: 300,
            base_seed,
            horizon: Horizon::Time(4.0),
            record_stride: alg.steps_for_horizon(1.0, n),
            init: InitMode::FixedSummary { m0: 0.3, r2_0: 0.9 },
            simulator,
        };
        let full = moments(&ensemble_run(&model, &alg, &spec(SimulatorKind::Full, 1)).unwrap());
        let proj = moments(&ensemble_run(&model, &alg, &spec(SimulatorKind::Projected, 2)).unwrap());
        assert_eq!(full.len(), proj.len());
        for (j, (a, b)) in full.iter().zip(&proj).enumerate().skip(1) {
            for c in 0..2 {
                let se = (a[c].stderr().powi(2) + b[c].stderr().powi(2)).sqrt();
                let z = (a[c].mean() - b[c].mean()) / se;
                assert!(z.abs() < 5.0, "{name}, record {j}, coordinate {c}: full {} vs projected {} (z = {z})", a[c].mean(), b[c].mean());
            }
        }
    }
}

#[test]
fn equivalence_holds_at_zero_and_high_momentum() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = in_tempdir(preset("equivalence").unwrap(), &dir);
    cfg.run.simulator = SimulatorKind::Projected;

    let out = cmd_equivalence(&cfg, 0.0, 1.0, 0.05).unwrap();
    assert_eq!(out.plain.kind, AlgorithmKind::Sgd);
    assert_eq!(out.report.sup_norm_m_over_r, 0.0);

    let out = cmd_equivalence(&cfg, 0.9, 0.1, 0.05).unwrap();
    assert_eq!(out.momentum.kind, AlgorithmKind::SgdM);
    assert!((out.plain.c_delta - 1.0).abs() < 1e-12);
    assert!(out.report.sup_norm_m_over_r <= 0.05, "{:?}", out.report.sup_norm_m_over_r);
}

fn fixed_start_sgdu(lambda_sim: f64, lambda_limit: f64) -> f64 {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = in_tempdir(preset("fig1-right").unwrap(), &dir);
    cfg.algorithms.retain(|a| a.kind == AlgorithmKind::SgdU);
    cfg.run.init = InitMode::FixedSummary { m0: 0.1, r2_0: 0.99 };
    cfg.run.simulator = SimulatorKind::Projected;
    cfg.run.record_stride = 100;
    if let hdsgd::experiment::ModelConfig::TensorPca { lambda, .. } = &mut cfg.model {
        *lambda = lambda_sim;
    }
    let sim = cmd_simulate(&cfg).unwrap();
    let sim_curve = Curve::from_mean(&sim.ensembles[0].mean_trajectory());

    if let hdsgd::experiment::ModelConfig::TensorPca { lambda, .. } = &mut cfg.model {
        *lambda = lambda_limit;
    }
    cfg.limit.as_mut().unwrap().init = Some([0.1, 0.99]);
    let lim = cmd_limit(&cfg).unwrap();
    let LimitResult::Ode(path) = &lim.results[0].1 else { panic!("expected an ODE path") };
    let report = compare_curves(&sim_curve, &Curve::from_path(path), 0.05).unwrap();
    report.sup_norm_m_over_r.max(report.sup_norm_r2)
}

#[test]
fn simulation_tracks_its_limit_and_not_a_mismatched_one() {
    let d = fixed_start_sgdu(2.2, 2.2);
    assert!(d < 0.05, "matched distance {d}");
    let d = fixed_start_sgdu(2.2, 1.2);
    assert!(d > 0.2, "mismatched distance {d}");
}

fn sweep_with_threshold(threshold: f64) -> hdsgd::experiment::SweepReport {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = in_tempdir(preset("sweep-k2").unwrap(), &dir);
    cfg.sweep.as_mut().unwrap().success_threshold = threshold;
    cmd_sweep(&cfg).unwrap().0
}

fn bracket(report: &hdsgd::experiment::SweepReport, kind: AlgorithmKind) -> &hdsgd::experiment::Bracket {
    report.brackets.iter().find(|b| b.algorithm.kind == kind).unwrap()
}

/// Signal strength at which the stable direction cosine of the `k = 2`
/// limit equals `xi` (`c_delta = 1`).
fn lambda_at_cosine(kind: AlgorithmKind, xi: f64) -> f64 {
    match kind {
        // m^2 = lambda - 1 and r2 = 1.
        AlgorithmKind::Sgd => 1.0 / (1.0 - xi * xi),
        // r2 = 1 / (2 sqrt(2 lambda)) and xi^2 = 1 - r2 / lambda.
        _ => (1.0 / (2.0 * 2f64.sqrt() * (1.0 - xi * xi))).powf(2.0 / 3.0),
    }
}

#[test]
fn sweep_with_half_cosine_success_brackets_the_half_cosine_crossing() {
    let report = sweep_with_threshold(0.5);
    for kind in [AlgorithmKind::Sgd, AlgorithmKind::SgdU] {
        let b = bracket(&report, kind);
        let crossing = lambda_at_cosine(kind, 0.5);
        assert!(b.contains(crossing), "{kind:?}: bracket {:?}-{:?}, crossing {crossing}", b.lo, b.hi);
        assert!(!b.contains(b.lambda_crit));
    }
}

#[test]
fn sweep_with_escape_success_brackets_the_threshold() {
    let report = sweep_with_threshold(0.2);
    assert!(bracket(&report, AlgorithmKind::SgdU).contains(0.5));
    assert!(bracket(&report, AlgorithmKind::Sgd).contains(1.0));
    assert!(report.agreement_rate >= 0.9, "agreement {}", report.agreement_rate);
    assert!(report.scored_cells >= 20);
}
