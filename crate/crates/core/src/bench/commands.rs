use std::fmt::Write as _;
use std::path::Path;

use super::{run_bench, run_suite, BenchOptions, CliError, SUITES};
use crate::grid::{case_hash, fixtures, parse_case, SystemCase};
use crate::scenario::{build_scenarios, generate_dataset, Dataset};
use crate::svm::{grid_search, read_model, train_on_dataset, write_model, ConfusionMatrix, SvmConfig, DEFAULT_CNEG_GRID};
use crate::tsuc::{solution_report, solve_tsuc, Mode, SolveOptions, TsucInstance};

/// Reads a case from a file path, falling back to a bundled fixture name
/// (`three_bus`, `six_bus`, `twentyfour_bus`). Returns the case and a
/// display name.
pub fn load_case(spec: &str) -> Result<(SystemCase, String), CliError> {
    let path = Path::new(spec);
    let text = if path.exists() {
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read case {spec}: {e}")))?
    } else if let Some(t) = fixtures::by_name(spec) {
        t.to_string()
    } else {
        return Err(CliError::Input(format!("case file not found: {spec}")));
    };
    let case = parse_case(&text).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_string());
    Ok((case, name))
}

/// Dataset CSV and a one-line summary.
pub fn cmd_gen_data(case: &SystemCase, samples: usize, seed: u64) -> Result<(String, String), CliError> {
    let d = generate_dataset(case, samples, seed)?;
    let (neg, pos) = d.class_counts();
    let summary = format!(
        "{} samples ({pos} feasible, {neg} infeasible, ratio {:.3}), {} train / {} test, case {}",
        d.len(),
        d.class_ratio(),
        d.train_indices.len(),
        d.test_indices.len(),
        &case_hash(&case.to_case_text())[..12]
    );
    Ok((d.to_csv_string(), summary))
}

#[derive(Clone, Debug)]
pub struct TrainArgs {
    pub c_positive: f64,
    /// `c_negative / c_positive`.
    pub cneg_ratio: f64,
    pub tolerance: f64,
    pub max_passes: usize,
    pub seed: u64,
    /// Cross-validate the `c_negative` grid on the training split first.
    pub grid_search: bool,
    pub folds: usize,
}

impl Default for TrainArgs {
    fn default() -> Self {
        let c = SvmConfig::default();
        Self {
            c_positive: c.c_positive,
            cneg_ratio: c.c_negative / c.c_positive,
            tolerance: c.tolerance,
            max_passes: c.max_passes,
            seed: 0,
            grid_search: false,
            folds: 5,
        }
    }
}

fn confusion_block(m: &ConfusionMatrix) -> String {
    format!(
        "                 predicted -1  predicted +1\n  actual -1  {:>14}  {:>12}\n  actual +1  {:>14}  {:>12}\n",
        m.true_neg, m.false_pos, m.false_neg, m.true_pos
    )
}

/// Model file text and a printed report with the test-split confusion matrix.
pub fn cmd_train(data_csv: &str, args: &TrainArgs) -> Result<(String, String), CliError> {
    let d = Dataset::from_csv_str(data_csv)?;
    let mut cfg = SvmConfig {
        c_positive: args.c_positive,
        c_negative: args.c_positive * args.cneg_ratio,
        tolerance: args.tolerance,
        max_passes: args.max_passes,
        seed: args.seed,
        ..SvmConfig::default()
    };
    cfg.validate()?;
    let mut out = String::new();
    if args.grid_search {
        let train = d.train();
        let rows: Vec<&[f64]> = train.iter().map(|s| s.features.as_slice()).collect();
        let labels: Vec<_> = train.iter().map(|s| s.label).collect();
        let grid: Vec<f64> = DEFAULT_CNEG_GRID.iter().map(|g| g * args.c_positive).collect();
        let (results, best) = grid_search(&rows, &labels, &d.feature_names, &cfg, &grid, args.folds)?;
        for r in &results {
            writeln!(
                out,
                "cv c_negative={:<6} accuracy {:.4} false-positive rate {:.4}",
                r.c_negative,
                r.confusion.accuracy(),
                r.confusion.false_positive_rate()
            )
            .unwrap();
        }
        cfg.c_negative = results[best].c_negative;
        writeln!(out, "selected c_negative={}", cfg.c_negative).unwrap();
    }
    let t = train_on_dataset(&d, &cfg)?;
    let m = &t.test_confusion;
    writeln!(out, "hyperplane: {}", t.model.hyperplane.describe()).unwrap();
    writeln!(
        out,
        "dual passes {} ({}), support vectors {}, margin {:.6e}",
        t.report.passes,
        if t.report.converged { "converged" } else { "pass limit" },
        t.report.support_vectors.len(),
        t.model.margin
    )
    .unwrap();
    writeln!(out, "test split ({} samples):", m.total()).unwrap();
    out.push_str(&confusion_block(m));
    writeln!(
        out,
        "test accuracy {:.4}, false-positive rate {:.4}, false-negative rate {:.4}",
        m.accuracy(),
        m.false_positive_rate(),
        m.false_negative_rate()
    )
    .unwrap();
    Ok((write_model(&t.model), out))
}

#[derive(Clone, Debug)]
pub struct SolveArgs {
    /// Model file text; required for surrogate mode.
    pub model: Option<String>,
    pub scenarios: usize,
    pub horizon: usize,
    pub surrogate: bool,
    pub seed: u64,
    pub solve: SolveOptions,
    pub pwl_segments: usize,
}

/// Solution report CSV and a printed summary.
pub fn cmd_solve(case: &SystemCase, args: &SolveArgs) -> Result<(String, String), CliError> {
    let mode = if args.surrogate {
        let text = args
            .model
            .as_deref()
            .ok_or_else(|| CliError::Input("surrogate mode needs --model".into()))?;
        Mode::Surrogate(read_model(text)?.hyperplane)
    } else {
        Mode::FullNetwork
    };
    let scenarios = build_scenarios(case, args.scenarios, args.horizon, args.seed)?;
    let mut inst = TsucInstance::new(case.clone(), scenarios, args.horizon, mode);
    inst.pwl_segments = args.pwl_segments;
    let sol = solve_tsuc(&inst, &args.solve)?;
    let c = &sol.counts;
    let st = &sol.stats;
    let mut out = String::new();
    writeln!(out, "mode {}", sol.mode).unwrap();
    writeln!(out, "objective {:.6}", sol.objective).unwrap();
    writeln!(out, "gap {:.3e}{}", st.gap, if st.node_limit_hit { " (node limit reached)" } else { "" }).unwrap();
    writeln!(out, "wall time {:.3} ms, {} nodes, {} LP solves", st.wall_time_ms, st.nodes, st.lp_solves).unwrap();
    writeln!(
        out,
        "constraints: {} flow rows, {} surrogate rows, {} total rows, {} variables",
        c.flow_rows, c.surrogate_rows, c.total_rows, c.variables
    )
    .unwrap();
    Ok((solution_report(&sol), out))
}

/// Report CSV and printed summary.
pub fn cmd_bench(case: &SystemCase, name: &str, opts: &BenchOptions) -> (String, String) {
    let r = run_bench(case, name, opts);
    (r.to_csv(), r.summary())
}

/// Per-suite lines and whether every suite passed. No suites means all.
pub fn cmd_validate(case: &SystemCase, suites: &[String], seed: u64) -> Result<(String, bool), CliError> {
    let names: Vec<String> = if suites.is_empty() {
        SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        suites.to_vec()
    };
    let mut out = String::new();
    let mut all = true;
    for n in &names {
        let r = run_suite(n, case, seed)?;
        all &= r.passed;
        writeln!(out, "{}: {} ({})", r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail).unwrap();
    }
    Ok((out, all))
}
