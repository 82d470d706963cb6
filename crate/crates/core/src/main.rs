use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hdsgd::experiment::{
    cmd_compare, cmd_equivalence, cmd_fixed_points, cmd_limit, cmd_simulate, cmd_sweep, cmd_verify, preset, to_full_scale,
    ExperimentConfig, PRESET_NAMES,
};
use hdsgd::lemmas::{Suite, DEFAULT_N_MC};
use hdsgd::Error;

#[derive(Parser)]
#[command(name = "hdsgd", version, about = "High-dimensional SGD, momentum and normalized SGD: simulations and effective limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named preset, used when no --config is given.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Overrides the base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the dimension.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Uses n = 10^4 (and 10^6 steps for step-count presets).
    #[arg(long, global = true)]
    full_scale: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every configured algorithm.
    Simulate,
    /// Integrate the effective limit of every configured algorithm.
    Limit,
    /// Sup-norm distance between a simulation CSV and a limit CSV.
    Compare {
        #[arg(long)]
        sim: PathBuf,
        #[arg(long)]
        limit: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
    /// SGD-M(beta, c) against SGD(c / (1 - beta)) at equal iteration counts.
    Equivalence {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        c_delta: f64,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
    /// Fixed points and their stability.
    FixedPoints,
    /// Monte Carlo checks of the Gaussian lemmas and generator identities.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_N_MC)]
        n_mc: usize,
    },
    /// Phase table over lambda, c_delta and algorithm.
    Sweep,
    /// List preset names, or print one as JSON with --preset.
    Presets,
}

enum Failure {
    Verification(String),
    Config(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn load(cli: &Cli, fallback: Option<&str>) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match (&cli.config, cli.preset.as_deref().or(fallback)) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => return Err(Failure::Config("pass --config PATH or --preset NAME".into())),
    };
    if cli.full_scale {
        to_full_scale(&mut cfg);
    }
    if let Some(n) = cli.n {
        cfg.model.set_n(n);
    }
    if let Some(s) = cli.seed {
        cfg.run.base_seed = s;
    }
    if let Some(r) = cli.replicas {
        cfg.run.replicas = r;
    }
    if let Some(o) = &cli.out {
        cfg.output.directory = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Simulate => {
            let cfg = load(cli, None)?;
            let out = cmd_simulate(&cfg)?;
            for ens in &out.ensembles {
                let (mean, se) = ens.final_m_over_r();
                println!(
                    "{}: final |m/R| = {mean:.4} +- {se:.4}, diverged {}/{}",
                    ens.algorithm.tag(),
                    ens.diverged_count(),
                    ens.trajectories.len()
                );
            }
            println!("wrote {} files under {}", out.files.len(), cfg.output.directory.display());
        }
        Command::Limit => {
            let cfg = load(cli, None)?;
            for f in cmd_limit(&cfg)?.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Compare { sim, limit, tolerance } => {
            let r = cmd_compare(sim, limit, *tolerance)?;
            println!(
                "sup |m/R| distance {:.6}, sup r2 distance {:.6}, tolerance {}, {}",
                r.sup_norm_m_over_r,
                r.sup_norm_r2,
                r.tolerance,
                if r.pass { "PASS" } else { "FAIL" }
            );
            if !r.pass {
                return Err(Failure::Verification("comparison exceeds tolerance".into()));
            }
        }
        Command::Equivalence { beta, c_delta, tolerance } => {
            let cfg = load(cli, Some("equivalence"))?;
            let out = cmd_equivalence(&cfg, *beta, *c_delta, *tolerance)?;
            let r = &out.report;
            println!(
                "{} vs {} over {} steps: sup |m/R| distance {:.6}, sup r2 distance {:.6}, {}",
                out.momentum.tag(),
                out.plain.tag(),
                out.steps,
                r.sup_norm_m_over_r,
                r.sup_norm_r2,
                if r.pass { "PASS" } else { "FAIL" }
            );
            if !r.pass {
                return Err(Failure::Verification("equivalence distance exceeds tolerance".into()));
            }
        }
        Command::FixedPoints => {
            let cfg = load(cli, None)?;
            let (rows, path) = cmd_fixed_points(&cfg)?;
            print!("{}", hdsgd::experiment::fixed_point_table(&rows).render());
            println!("wrote {}", path.display());
        }
        Command::Verify { suite, n_mc } => {
            let suite: Suite = suite.parse()?;
            let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let (rows, path) = cmd_verify(suite, *n_mc, cli.seed.unwrap_or(0), &out_dir)?;
            let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
            println!("{} checks, {} failed; wrote {}", rows.len(), failed.len(), path.display());
            for f in &failed {
                println!("FAIL {} [{}] mc={} closed={} z={:.3}", f.lemma, f.parameters, f.mc, f.closed, f.z);
            }
            if !failed.is_empty() {
                return Err(Failure::Verification(format!("{} lemma checks failed", failed.len())));
            }
        }
        Command::Sweep => {
            let cfg = load(cli, Some("sweep-k2"))?;
            let (report, files) = cmd_sweep(&cfg)?;
            for b in &report.brackets {
                println!(
                    "{}: lambda_crit {:.4}, transition bracket [{}, {}]",
                    b.algorithm.tag(),
                    b.lambda_crit,
                    b.lo.map_or("-".into(), |v| v.to_string()),
                    b.hi.map_or("-".into(), |v| v.to_string())
                );
            }
            println!("agreement {:.3} over {} cells away from threshold", report.agreement_rate, report.scored_cells);
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Command::Presets => match &cli.preset {
            Some(name) => println!("{}", preset(name)?.to_json()),
            None => PRESET_NAMES.iter().for_each(|n| println!("{n}")),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
