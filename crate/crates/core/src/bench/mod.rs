//! Benchmark harness and the command implementations behind the `ucsm`
//! binary: data generation, training, solving, paired benchmarks and
//! validation suites.

mod commands;
mod config;
mod report;
mod validate;

pub use commands::{cmd_bench, cmd_gen_data, cmd_solve, cmd_train, cmd_validate, load_case, SolveArgs, TrainArgs};
pub use config::{ConfigFile, KNOWN_KEYS};
pub use report::{sig3, Aggregates, BenchmarkReport, Classification, MinAvgMax, ModeRun, TrialRow};
pub use validate::{run_suite, SuiteOutcome, SUITES};

use rayon::prelude::*;

use crate::grid::{GridError, SystemCase};
use crate::scenario::{build_scenarios, generate_dataset, ScenarioError};
use crate::svm::{train_on_dataset, SvmConfig, SvmError};
use crate::tsuc::{solve_tsuc, Mode, SolveOptions, TsucError, TsucInstance};

/// Error carrying its process exit status.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    /// Exit 1.
    #[error("{0}")]
    Property(String),
    /// Exit 2: unreadable or malformed input.
    #[error("{0}")]
    Input(String),
    /// Exit 3: valid input whose data cannot be used.
    #[error("{0}")]
    Data(String),
    /// Exit 4: model and case disagree.
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Property(_) => 1,
            CliError::Input(_) => 2,
            CliError::Data(_) => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::BalancingFailed { .. } | ScenarioError::Dcopf(_) => CliError::Data(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SvmError> for CliError {
    fn from(e: SvmError) -> Self {
        match e {
            SvmError::SingleClassData | SvmError::TooFewSamples(_) => CliError::Data(e.to_string()),
            SvmError::DimensionMismatch(_) => CliError::Mismatch(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<TsucError> for CliError {
    fn from(e: TsucError) -> Self {
        match e {
            TsucError::FeatureMismatch(_) => CliError::Mismatch(e.to_string()),
            TsucError::Infeasible | TsucError::Solver(_) | TsucError::Lp(_) => CliError::Data(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub trials: usize,
    pub seed: u64,
    pub samples: usize,
    pub scenarios: usize,
    pub horizon: usize,
    pub solve: SolveOptions,
    pub pwl_segments: usize,
    /// Timed solves per mode; the median wall time is reported.
    pub repeats: usize,
    pub svm: SvmConfig,
    pub parallel_trials: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            trials: 5,
            seed: 1,
            samples: 1000,
            scenarios: 10,
            horizon: 24,
            solve: SolveOptions::default(),
            pwl_segments: crate::tsuc::DEFAULT_PWL_SEGMENTS,
            repeats: 3,
            svm: SvmConfig::default(),
            parallel_trials: false,
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn timed_solve(inst: &TsucInstance, opts: &BenchOptions) -> Result<ModeRun, String> {
    let mut times = Vec::with_capacity(opts.repeats.max(1));
    let mut last = None;
    for _ in 0..opts.repeats.max(1) {
        let sol = solve_tsuc(inst, &opts.solve).map_err(|e| e.to_string())?;
        times.push(sol.stats.wall_time_ms);
        last = Some(sol);
    }
    let sol = last.expect("at least one repeat");
    Ok(ModeRun {
        objective: sol.objective,
        wall_time_ms: sig3(median(times)),
        nodes: sol.stats.nodes,
        constraint_count: sol.counts.flow_rows + sol.counts.surrogate_rows,
        gap: sol.stats.gap,
    })
}

fn run_trial(case: &SystemCase, trial: usize, opts: &BenchOptions) -> TrialRow {
    let seed = opts.seed + trial as u64;
    let fail = |e: String| TrialRow {
        trial: trial + 1,
        seed,
        full: Err(e.clone()),
        surrogate: Err(e),
        classification: None,
    };
    let data = match generate_dataset(case, opts.samples, seed) {
        Ok(d) => d,
        Err(e) => return fail(format!("data generation: {e}")),
    };
    let trained = match train_on_dataset(&data, &SvmConfig { seed, ..opts.svm.clone() }) {
        Ok(t) => t,
        Err(e) => return fail(format!("training: {e}")),
    };
    let scenarios = match build_scenarios(case, opts.scenarios, opts.horizon, seed) {
        Ok(s) => s,
        Err(e) => return fail(format!("scenarios: {e}")),
    };
    let instance = |mode| {
        let mut inst = TsucInstance::new(case.clone(), scenarios.clone(), opts.horizon, mode);
        inst.pwl_segments = opts.pwl_segments;
        inst
    };
    let full = timed_solve(&instance(Mode::FullNetwork), opts);
    let surrogate = timed_solve(&instance(Mode::Surrogate(trained.model.hyperplane.clone())), opts);
    TrialRow {
        trial: trial + 1,
        seed,
        full,
        surrogate,
        classification: Some(Classification {
            confusion: trained.test_confusion,
            margin: trained.model.margin,
        }),
    }
}

/// Paired full/surrogate solves over `opts.trials` consecutive seeds, each
/// with its own dataset, model and scenario set. Stage failures are
/// recorded in the trial's row.
pub fn run_bench(case: &SystemCase, case_name: &str, opts: &BenchOptions) -> BenchmarkReport {
    let trials = if opts.parallel_trials {
        (0..opts.trials).into_par_iter().map(|k| run_trial(case, k, opts)).collect()
    } else {
        (0..opts.trials).map(|k| run_trial(case, k, opts)).collect()
    };
    BenchmarkReport {
        case_name: case_name.to_string(),
        lines: case.num_lines(),
        scenarios: opts.scenarios,
        horizon: opts.horizon,
        gap_tol: opts.solve.gap_tol,
        timing_comparable: !opts.parallel_trials,
        trials,
    }
}
