//! Two-stage stochastic unit commitment: MILP construction in full-network
//! or surrogate mode, branch-and-bound, a brute-force oracle, solution
//! checks and reports.
//!
//! Costs use piecewise-linear secants of each unit's quadratic, so every
//! relaxation is an LP for [`crate::lp`].

mod bnb;
mod brute;
mod check;
mod model;
pub mod pwl;
mod report;

pub use bnb::{solve_tsuc, SolveOptions};
pub use brute::{brute_force_tsuc, BRUTE_FORCE_MAX_BINARIES};
pub use check::{check_solution, schedule_is_valid};
pub use model::{build_milp, constraint_counts, ConstraintCounts, TsucModel, VarLayout};
pub use report::solution_report;

use crate::grid::SystemCase;
use crate::lp::LpError;
use crate::scenario::Scenario;
use crate::svm::Hyperplane;

/// Slack on the surrogate row, absorbing LP round-off.
pub const SURROGATE_TOL: f64 = 1e-9;
pub const DEFAULT_PWL_SEGMENTS: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TsucError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("feature mismatch: {0}")]
    FeatureMismatch(String),
    #[error("no commitment schedule satisfies the constraints")]
    Infeasible,
    #[error("instance too large for enumeration: {binaries} commitment binaries (limit {limit})")]
    TooLarge { binaries: usize, limit: usize },
    #[error("LP solver: {0}")]
    Lp(#[from] LpError),
    #[error("LP relaxation ended with status {0:?}")]
    Solver(crate::lp::LpStatus),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    /// Two line-limit rows per line, scenario and hour.
    FullNetwork,
    /// One learned halfspace per scenario and hour; no line-limit rows.
    Surrogate(Hyperplane),
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::FullNetwork => "full",
            Mode::Surrogate(_) => "surrogate",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TsucInstance {
    pub case: SystemCase,
    pub scenarios: Vec<Scenario>,
    pub horizon: usize,
    pub mode: Mode,
    pub pwl_segments: usize,
    /// Commitment before hour 1.
    pub initial_status: Vec<bool>,
}

impl TsucInstance {
    /// All units initially off, default segment count.
    pub fn new(case: SystemCase, scenarios: Vec<Scenario>, horizon: usize, mode: Mode) -> Self {
        let g = case.num_generators();
        Self {
            case,
            scenarios,
            horizon,
            mode,
            pwl_segments: DEFAULT_PWL_SEGMENTS,
            initial_status: vec![false; g],
        }
    }

    pub fn validate(&self) -> Result<(), TsucError> {
        let bad = |m: String| Err(TsucError::InvalidInstance(m));
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.scenarios.is_empty() {
            return bad("need at least one scenario".into());
        }
        if self.pwl_segments == 0 {
            return bad("need at least one cost segment".into());
        }
        if self.initial_status.len() != self.case.num_generators() {
            return bad(format!(
                "{} initial statuses for {} generators",
                self.initial_status.len(),
                self.case.num_generators()
            ));
        }
        for (k, s) in self.scenarios.iter().enumerate() {
            if s.horizon() < self.horizon || s.wind_mw.len() < self.horizon {
                return bad(format!("scenario {k} covers {} hours, need {}", s.horizon(), self.horizon));
            }
            if s.wind.mu.len() != self.case.num_wind() {
                return bad(format!("scenario {k} has wind parameters for {} units", s.wind.mu.len()));
            }
        }
        if let Mode::Surrogate(h) = &self.mode {
            let want = self.case.feature_names();
            if h.feature_names != want {
                return Err(TsucError::FeatureMismatch(format!(
                    "hyperplane features [{}] do not match case features [{}]",
                    h.feature_names.join(","),
                    want.join(",")
                )));
            }
            if h.weights_physical.len() != want.len() {
                return Err(TsucError::FeatureMismatch("weight count differs from feature count".into()));
            }
        }
        Ok(())
    }
}

/// Binary commitment decisions, indexed `[g][t]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub u: Vec<Vec<bool>>,
    pub y: Vec<Vec<bool>>,
    pub z: Vec<Vec<bool>>,
}

impl Schedule {
    /// Startups and shutdowns implied by `u` and the initial status.
    pub fn from_commitment(u: Vec<Vec<bool>>, initial: &[bool]) -> Self {
        let mut y = Vec::with_capacity(u.len());
        let mut z = Vec::with_capacity(u.len());
        for (row, &u0) in u.iter().zip(initial) {
            let mut prev = u0;
            let mut yr = Vec::with_capacity(row.len());
            let mut zr = Vec::with_capacity(row.len());
            for &on in row {
                yr.push(on && !prev);
                zr.push(!on && prev);
                prev = on;
            }
            y.push(yr);
            z.push(zr);
        }
        Self { u, y, z }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub nodes: usize,
    pub lp_solves: usize,
    pub lp_iterations: usize,
    pub wall_time_ms: f64,
    /// Relative gap between incumbent and best bound.
    pub gap: f64,
    pub root_bound: f64,
    pub node_limit_hit: bool,
}

#[derive(Clone, Debug)]
pub struct TsucSolution {
    pub schedule: Schedule,
    /// `dispatch[s][t][g]`, MW.
    pub dispatch: Vec<Vec<Vec<f64>>>,
    /// `angles[s][t][bus]`, rad.
    pub angles: Vec<Vec<Vec<f64>>>,
    pub objective: f64,
    pub stats: SolveStats,
    pub counts: ConstraintCounts,
    pub mode: &'static str,
}

/// `[mu_s, sigma_s, p_{., s, t}]` in the dataset's column order.
pub fn build_feature_vector(scenario: &Scenario, dispatch: &[f64], names: &[String]) -> Result<Vec<f64>, TsucError> {
    let phi = crate::scenario::feature_vector(&scenario.wind, dispatch);
    if phi.len() != names.len() {
        return Err(TsucError::FeatureMismatch(format!(
            "feature vector has {} entries, names list {}",
            phi.len(),
            names.len()
        )));
    }
    Ok(phi)
}
