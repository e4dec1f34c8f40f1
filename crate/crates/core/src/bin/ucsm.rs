use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ucsm::bench::{
    cmd_bench, cmd_gen_data, cmd_solve, cmd_train, cmd_validate, load_case, BenchOptions, CliError, ConfigFile,
    SolveArgs, TrainArgs,
};
use ucsm::lp::SimplexOptions;
use ucsm::tsuc::{SolveOptions, DEFAULT_PWL_SEGMENTS};

/// Learned line-flow surrogates for two-stage stochastic unit commitment.
#[derive(Parser)]
#[command(name = "ucsm", version)]
struct Cli {
    /// Key-value config file; every key mirrors a flag and flags win.
    #[arg(long, env = "UCSM_CONFIG", global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Case file path or bundled fixture name (three_bus, six_bus, twentyfour_bus).
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolverFlags {
    #[arg(long)]
    gap_tol: Option<f64>,
    #[arg(long)]
    node_limit: Option<usize>,
    #[arg(long)]
    pwl_segments: Option<usize>,
    #[arg(long)]
    feasibility_tol: Option<f64>,
    #[arg(long)]
    optimality_tol: Option<f64>,
    #[arg(long)]
    pivot_tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Surrogate,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled DCOPF dataset.
    GenData {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Train the class-weighted SVM on a dataset.
    Train {
        #[command(flatten)]
        common: Common,
        /// Dataset CSV written by gen-data.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        c_positive: Option<f64>,
        /// c_negative / c_positive.
        #[arg(long)]
        cneg_ratio: Option<f64>,
        #[arg(long)]
        svm_tolerance: Option<f64>,
        #[arg(long)]
        max_passes: Option<usize>,
        /// Pick c_negative by cross-validation on the training split.
        #[arg(long)]
        grid_search: bool,
        #[arg(long)]
        folds: Option<usize>,
    },
    /// Solve one TSUC instance.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Model file written by train; required in surrogate mode.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        scenarios: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Paired full/surrogate benchmark over several seeds.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        scenarios: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        /// Timed solves per mode (median reported).
        #[arg(long)]
        repeats: Option<usize>,
        /// Run trials concurrently; timings are marked non-comparable.
        #[arg(long)]
        parallel_trials: bool,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Run the oracle property suites.
    Validate {
        #[command(flatten)]
        common: Common,
        /// lp, ptdf, brute or monotonic; repeatable. All when absent.
        #[arg(long)]
        suite: Vec<String>,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, artifact: &str, summary: &str) -> Result<(), CliError> {
    match out {
        Some(p) => {
            std::fs::write(p, artifact).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))?;
            print!("{summary}");
            if !summary.ends_with('\n') {
                println!();
            }
            println!("wrote {}", p.display());
        }
        None => {
            print!("{artifact}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

struct Resolved {
    case: String,
    seed: u64,
    out: Option<PathBuf>,
}

fn common(cfg: &ConfigFile, c: Common) -> Result<Resolved, CliError> {
    Ok(Resolved {
        case: cfg.pick(c.case, "case")?.unwrap_or_else(|| "six_bus".into()),
        seed: cfg.pick_or(c.seed, "seed", 1)?,
        out: cfg.pick(c.out, "out")?,
    })
}

fn solver_options(cfg: &ConfigFile, f: SolverFlags) -> Result<(SolveOptions, usize), CliError> {
    let d = SolveOptions::default();
    let s = SimplexOptions::default();
    let opts = SolveOptions {
        gap_tol: cfg.pick_or(f.gap_tol, "gap-tol", d.gap_tol)?,
        node_limit: cfg.pick_or(f.node_limit, "node-limit", d.node_limit)?,
        simplex: SimplexOptions {
            feasibility_tol: cfg.pick_or(f.feasibility_tol, "feasibility-tol", s.feasibility_tol)?,
            optimality_tol: cfg.pick_or(f.optimality_tol, "optimality-tol", s.optimality_tol)?,
            pivot_tol: cfg.pick_or(f.pivot_tol, "pivot-tol", s.pivot_tol)?,
            ..s
        },
        ..d
    };
    Ok((opts, cfg.pick_or(f.pwl_segments, "pwl-segments", DEFAULT_PWL_SEGMENTS)?))
}

fn flag_or_config(cfg: &ConfigFile, flag: bool, key: &str) -> Result<bool, CliError> {
    Ok(flag || cfg.get::<bool>(key)?.unwrap_or(false))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::GenData { common: c, samples } => {
            let r = common(&cfg, c)?;
            let (case, _) = load_case(&r.case)?;
            let (csv, summary) = cmd_gen_data(&case, cfg.pick_or(samples, "samples", 1000)?, r.seed)?;
            emit(r.out.as_deref(), &csv, &summary)
        }
        Command::Train { common: c, data, c_positive, cneg_ratio, svm_tolerance, max_passes, grid_search, folds } => {
            let r = common(&cfg, c)?;
            let data: PathBuf =
                cfg.pick(data, "data")?.ok_or_else(|| CliError::Input("train needs --data".into()))?;
            let d = TrainArgs::default();
            let args = TrainArgs {
                c_positive: cfg.pick_or(c_positive, "c-positive", d.c_positive)?,
                cneg_ratio: cfg.pick_or(cneg_ratio, "cneg-ratio", d.cneg_ratio)?,
                tolerance: cfg.pick_or(svm_tolerance, "svm-tolerance", d.tolerance)?,
                max_passes: cfg.pick_or(max_passes, "max-passes", d.max_passes)?,
                seed: r.seed,
                grid_search: flag_or_config(&cfg, grid_search, "grid-search")?,
                folds: cfg.pick_or(folds, "folds", d.folds)?,
            };
            let (model, summary) = cmd_train(&read(&data)?, &args)?;
            emit(r.out.as_deref(), &model, &summary)
        }
        Command::Solve { common: c, mode, model, scenarios, horizon, solver } => {
            let r = common(&cfg, c)?;
            let (case, _) = load_case(&r.case)?;
            let surrogate = match mode {
                Some(m) => matches!(m, ModeArg::Surrogate),
                None => match cfg.get::<String>("mode")?.as_deref() {
                    None | Some("full") => false,
                    Some("surrogate") => true,
                    Some(o) => return Err(CliError::Input(format!("config key 'mode': unknown mode '{o}'"))),
                },
            };
            let model_path: Option<PathBuf> = cfg.pick(model, "model")?;
            let (solve, pwl_segments) = solver_options(&cfg, solver)?;
            let args = SolveArgs {
                model: model_path.as_deref().map(read).transpose()?,
                scenarios: cfg.pick_or(scenarios, "scenarios", 3)?,
                horizon: cfg.pick_or(horizon, "horizon", 4)?,
                surrogate,
                seed: r.seed,
                solve,
                pwl_segments,
            };
            let (report, summary) = cmd_solve(&case, &args)?;
            emit(r.out.as_deref(), &report, &summary)
        }
        Command::Bench { common: c, trials, samples, scenarios, horizon, repeats, parallel_trials, solver } => {
            let r = common(&cfg, c)?;
            let (case, name) = load_case(&r.case)?;
            let d = BenchOptions::default();
            let (solve, pwl_segments) = solver_options(&cfg, solver)?;
            let opts = BenchOptions {
                trials: cfg.pick_or(trials, "trials", d.trials)?,
                seed: r.seed,
                samples: cfg.pick_or(samples, "samples", d.samples)?,
                scenarios: cfg.pick_or(scenarios, "scenarios", d.scenarios)?,
                horizon: cfg.pick_or(horizon, "horizon", d.horizon)?,
                solve,
                pwl_segments,
                repeats: cfg.pick_or(repeats, "repeats", d.repeats)?,
                parallel_trials: flag_or_config(&cfg, parallel_trials, "parallel-trials")?,
                ..d
            };
            let (csv, summary) = cmd_bench(&case, &name, &opts);
            emit(r.out.as_deref(), &csv, &summary)
        }
        Command::Validate { common: c, suite } => {
            let r = common(&cfg, c)?;
            let (case, _) = load_case(&r.case)?;
            let suites = if suite.is_empty() {
                cfg.get::<String>("suite")?
                    .map(|s| s.split(',').map(|x| x.trim().to_string()).collect())
                    .unwrap_or_default()
            } else {
                suite
            };
            let (summary, ok) = cmd_validate(&case, &suites, r.seed)?;
            print!("{summary}");
            if let Some(p) = &r.out {
                std::fs::write(p, &summary)
                    .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))?;
            }
            if ok {
                Ok(())
            } else {
                Err(CliError::Property("validation failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
