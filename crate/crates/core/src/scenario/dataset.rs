use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{
    feature_vector, sample_load_multipliers, sample_wind_params, sample_z, substream, z_grid,
    ScenarioError,
};
use crate::dcopf::{check_feasibility, solve_dcopf, DcopfStatus, Label};
use crate::grid::{build_matrices, case_hash, GridMatrices, SystemCase};

const STEP1_STREAM: u64 = 1;
const STEP2_STREAM: u64 = 2;
const SPLIT_STREAM: u64 = 3;
pub const TRAIN_FRACTION: f64 = 0.8;

/// Which generation pass produced a sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    /// Line-constrained DCOPF; every optimum is feasible.
    Constrained,
    /// Line limits dropped; labelled by checking the flows.
    Relaxed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub features: Vec<f64>,
    pub label: Label,
    pub step: Step,
    pub index: u64,
    /// Line flows of the run, MW. Empty for samples read back from CSV.
    pub flows: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub samples: Vec<LabeledSample>,
    pub feature_names: Vec<String>,
    pub seed: u64,
    pub case_hash: String,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct GenerationConfig {
    pub n_target: usize,
    pub seed: u64,
    pub pwl_segments: usize,
    pub balance_rounds: usize,
    pub min_class_ratio: f64,
}

impl GenerationConfig {
    pub fn new(n_target: usize, seed: u64) -> Self {
        Self {
            n_target,
            seed,
            pwl_segments: 8,
            balance_rounds: 50,
            min_class_ratio: 0.8,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GenerationStats {
    pub constrained_runs: usize,
    pub constrained_kept: usize,
    pub relaxed_runs: usize,
    pub balancing_rounds: usize,
}

pub fn generate_dataset(case: &SystemCase, n_target: usize, seed: u64) -> Result<Dataset, ScenarioError> {
    generate_dataset_with(case, &GenerationConfig::new(n_target, seed)).map(|(d, _)| d)
}

pub fn generate_dataset_with(
    case: &SystemCase,
    cfg: &GenerationConfig,
) -> Result<(Dataset, GenerationStats), ScenarioError> {
    if cfg.n_target < 50 {
        return Err(ScenarioError::InvalidArgument(format!(
            "n_target must be at least 50, got {}",
            cfg.n_target
        )));
    }
    let m = build_matrices(case)?;
    let grid = z_grid();
    let n1 = cfg.n_target.div_ceil(2);
    let n2 = cfg.n_target - n1;
    let mut stats = GenerationStats {
        constrained_runs: n1,
        relaxed_runs: n2,
        ..Default::default()
    };

    let mut samples = run_batch(case, &m, cfg, Step::Constrained, 0..n1 as u64, &grid)?;
    stats.constrained_kept = samples.len();
    samples.extend(run_batch(case, &m, cfg, Step::Relaxed, 0..n2 as u64, &grid)?);

    let batch = (cfg.n_target / 10).max(1) as u64;
    let mut next = n2 as u64;
    loop {
        let (neg, pos) = class_counts(&samples);
        let ratio = ratio(neg, pos);
        if ratio >= cfg.min_class_ratio && samples.len() >= cfg.n_target {
            break;
        }
        if stats.balancing_rounds == cfg.balance_rounds {
            return Err(ScenarioError::BalancingFailed {
                attempts: stats.balancing_rounds,
                achieved_ratio: ratio,
            });
        }
        stats.balancing_rounds += 1;
        let extra = run_batch(case, &m, cfg, Step::Relaxed, next..next + batch, &grid)?;
        next += batch;
        stats.relaxed_runs += batch as usize;
        if ratio >= cfg.min_class_ratio {
            samples.extend(extra);
        } else {
            let minority = if neg < pos { Label::Infeasible } else { Label::Feasible };
            samples.extend(extra.into_iter().filter(|s| s.label == minority));
        }
    }
    samples.sort_by_key(|s| (s.step, s.index));

    let (train_indices, test_indices) = split_indices(samples.len(), cfg.seed);
    Ok((
        Dataset {
            samples,
            feature_names: case.feature_names(),
            seed: cfg.seed,
            case_hash: case_hash(&case.to_case_text()),
            train_indices,
            test_indices,
        },
        stats,
    ))
}

fn run_batch(
    case: &SystemCase,
    m: &GridMatrices,
    cfg: &GenerationConfig,
    step: Step,
    range: std::ops::Range<u64>,
    grid: &[f64],
) -> Result<Vec<LabeledSample>, ScenarioError> {
    let out: Result<Vec<Option<LabeledSample>>, ScenarioError> = range
        .into_par_iter()
        .map(|i| run_one(case, m, cfg, step, i, grid))
        .collect();
    Ok(out?.into_iter().flatten().collect())
}

fn run_one(
    case: &SystemCase,
    m: &GridMatrices,
    cfg: &GenerationConfig,
    step: Step,
    index: u64,
    grid: &[f64],
) -> Result<Option<LabeledSample>, ScenarioError> {
    let stream = match step {
        Step::Constrained => STEP1_STREAM,
        Step::Relaxed => STEP2_STREAM,
    };
    let mut rng = substream(cfg.seed, stream, index);
    let params = sample_wind_params(case, &mut rng);
    let z = match step {
        Step::Constrained => grid[index as usize % grid.len()],
        Step::Relaxed => sample_z(&mut rng),
    };
    let load: Vec<f64> = sample_load_multipliers(case.num_buses(), &mut rng)
        .iter()
        .zip(&case.buses)
        .map(|(k, b)| k * b.load_mw)
        .collect();
    let wind = params.realize(z);
    let enforce = step == Step::Constrained;
    let r = solve_dcopf(case, m, &wind, &load, enforce, cfg.pwl_segments)?;
    if r.status == DcopfStatus::Infeasible {
        return Ok(None);
    }
    let label = check_feasibility(case, &r.flows)?.label;
    debug_assert!(!enforce || label == Label::Feasible);
    Ok(Some(LabeledSample {
        features: feature_vector(&params, &r.dispatch),
        label,
        step,
        index,
        flows: r.flows,
    }))
}

fn class_counts(samples: &[LabeledSample]) -> (usize, usize) {
    let pos = samples.iter().filter(|s| s.label == Label::Feasible).count();
    (samples.len() - pos, pos)
}

fn ratio(a: usize, b: usize) -> f64 {
    let (lo, hi) = (a.min(b), a.max(b));
    if hi == 0 {
        0.0
    } else {
        lo as f64 / hi as f64
    }
}

/// Seeded shuffle of `0..n`; the first `round(0.8 n)` go to training. Both
/// lists come back sorted.
pub fn split_indices(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut substream(seed, SPLIT_STREAM, 0));
    let n_train = (TRAIN_FRACTION * n as f64).round() as usize;
    let mut train = idx[..n_train].to_vec();
    let mut test = idx[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

fn join_usize(v: &[usize]) -> String {
    v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn train(&self) -> Vec<&LabeledSample> {
        self.train_indices.iter().map(|&i| &self.samples[i]).collect()
    }

    pub fn test(&self) -> Vec<&LabeledSample> {
        self.test_indices.iter().map(|&i| &self.samples[i]).collect()
    }

    /// `(infeasible, feasible)`.
    pub fn class_counts(&self) -> (usize, usize) {
        class_counts(&self.samples)
    }

    /// Minority over majority class size.
    pub fn class_ratio(&self) -> f64 {
        let (a, b) = self.class_counts();
        ratio(a, b)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# ucsm dataset").unwrap();
        writeln!(out, "# seed={}", self.seed).unwrap();
        writeln!(out, "# case_hash={}", self.case_hash).unwrap();
        writeln!(out, "# samples={}", self.samples.len()).unwrap();
        writeln!(out, "# train_indices={}", join_usize(&self.train_indices)).unwrap();
        writeln!(out, "# test_indices={}", join_usize(&self.test_indices)).unwrap();
        writeln!(out, "{},label", self.feature_names.join(",")).unwrap();
        for s in &self.samples {
            for v in &s.features {
                write!(out, "{v:.16e},").unwrap();
            }
            writeln!(out, "{:+}", s.label.as_i8()).unwrap();
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self, ScenarioError> {
        let mut seed = None;
        let mut hash = String::new();
        let mut train = None;
        let mut test = None;
        let mut names: Option<Vec<String>> = None;
        let mut samples = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: String| ScenarioError::Parse { line: line_no, reason };
            if let Some(meta) = line.strip_prefix('#') {
                let Some((key, value)) = meta.trim().split_once('=') else {
                    continue;
                };
                let value = value.trim();
                match key.trim() {
                    "seed" => seed = Some(value.parse::<u64>().map_err(|e| bad(format!("seed: {e}")))?),
                    "case_hash" => hash = value.to_string(),
                    "train_indices" => train = Some(parse_indices(value).map_err(bad)?),
                    "test_indices" => test = Some(parse_indices(value).map_err(bad)?),
                    _ => {}
                }
                continue;
            }
            let Some(cols) = &names else {
                names = Some(check_header(line)?);
                continue;
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() + 1 {
                return Err(bad(format!("expected {} fields, found {}", cols.len() + 1, fields.len())));
            }
            let mut features = Vec::with_capacity(cols.len());
            for (name, f) in cols.iter().zip(&fields) {
                let v: f64 = f.parse().map_err(|_| bad(format!("column {name}: not a number: {f:?}")))?;
                if !v.is_finite() {
                    return Err(bad(format!("column {name}: non-finite value")));
                }
                features.push(v);
            }
            let label = fields[cols.len()]
                .parse::<i8>()
                .ok()
                .and_then(Label::from_i8)
                .ok_or_else(|| bad(format!("label must be +1 or -1, found {:?}", fields[cols.len()])))?;
            samples.push(LabeledSample {
                features,
                label,
                step: Step::Relaxed,
                index: samples.len() as u64,
                flows: Vec::new(),
            });
        }
        let feature_names = names.ok_or_else(|| ScenarioError::Header("missing header row".into()))?;
        let seed = seed.unwrap_or(0);
        let (train_indices, test_indices) = match (train, test) {
            (Some(a), Some(b)) => (a, b),
            _ => split_indices(samples.len(), seed),
        };
        let mut seen = vec![false; samples.len()];
        for &i in train_indices.iter().chain(&test_indices) {
            if i >= samples.len() || std::mem::replace(&mut seen[i], true) {
                return Err(ScenarioError::Header(format!("split index {i} out of range or repeated")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(ScenarioError::Header("split indices do not cover every sample".into()));
        }
        Ok(Self {
            samples,
            feature_names,
            seed,
            case_hash: hash,
            train_indices,
            test_indices,
        })
    }
}

fn parse_indices(v: &str) -> Result<Vec<usize>, String> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| format!("index {s:?}: {e}")))
        .collect()
}

/// Checks `mu_1..mu_W, sigma_1..sigma_W, pg_1..pg_G, label`.
fn check_header(line: &str) -> Result<Vec<String>, ScenarioError> {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    if cols.last() != Some(&"label") {
        return Err(ScenarioError::Header(format!(
            "last column must be 'label', found {:?}",
            cols.last().unwrap_or(&"")
        )));
    }
    let feats = &cols[..cols.len() - 1];
    let w = feats.iter().filter(|c| c.starts_with("mu_")).count();
    let g = feats.len().saturating_sub(2 * w);
    let expected: Vec<String> = (1..=w)
        .map(|k| format!("mu_{k}"))
        .chain((1..=w).map(|k| format!("sigma_{k}")))
        .chain((1..=g).map(|k| format!("pg_{k}")))
        .collect();
    for (i, (found, want)) in feats.iter().zip(&expected).enumerate() {
        if found != want {
            return Err(ScenarioError::Header(format!(
                "column {}: expected {want}, found {found}",
                i + 1
            )));
        }
    }
    if feats.len() != expected.len() {
        return Err(ScenarioError::Header("mu/sigma column counts differ".into()));
    }
    Ok(expected)
}
