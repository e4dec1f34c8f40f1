//! DC optimal power flow with and without line limits, and feasibility
//! labelling of operating points.
//!
//! All units are online with `p_min <= p <= p_max`; wind is a fixed
//! injection. Costs use the same piecewise-linear secants as the unit
//! commitment model so that training data and optimization share one cost
//! model.

use crate::grid::{GridMatrices, SystemCase};
use crate::lp::{solve_lp, LpError, LpProblem, LpStatus};
use crate::tsuc::pwl::{pwl_cost, PwlCost};

/// Line-limit slack used when labelling, MW.
pub const FEASIBILITY_TOL_MW: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DcopfError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("LP solver: {0}")]
    Lp(#[from] LpError),
    #[error("LP solve ended with status {0:?}")]
    Solver(LpStatus),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DcopfStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct DcopfResult {
    pub status: DcopfStatus,
    /// MW per generator.
    pub dispatch: Vec<f64>,
    /// Radians per bus, zero at the reference bus.
    pub angles: Vec<f64>,
    /// MW per line, from angles.
    pub flows: Vec<f64>,
    /// Net injection per bus, MW.
    pub injections: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Infeasible,
    Feasible,
}

impl Label {
    pub fn as_i8(self) -> i8 {
        match self {
            Label::Feasible => 1,
            Label::Infeasible => -1,
        }
    }

    pub fn sign(self) -> f64 {
        f64::from(self.as_i8())
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Label::Feasible),
            -1 => Some(Label::Infeasible),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityLabel {
    pub label: Label,
    /// `max(0, max_l |f_l| - limit_l)`, MW.
    pub worst_violation: f64,
    pub violating_lines: Vec<usize>,
}

/// DCOPF as an LP over segment variables `delta[g][k]`, with
/// `p_g = p_min_g + sum_k delta[g][k]`. The returned offset is the cost of
/// every unit at `p_min`.
pub struct DcopfLp {
    pub problem: LpProblem,
    pub cost_offset: f64,
    pub pwl: Vec<PwlCost>,
    /// `var_of[g][k]`.
    pub var_of: Vec<Vec<usize>>,
}

fn check_dims(case: &SystemCase, wind_mw: &[f64], load_mw: &[f64]) -> Result<(), DcopfError> {
    if wind_mw.len() != case.num_wind() {
        return Err(DcopfError::DimensionMismatch(format!(
            "{} wind values for {} wind units",
            wind_mw.len(),
            case.num_wind()
        )));
    }
    if load_mw.len() != case.num_buses() {
        return Err(DcopfError::DimensionMismatch(format!(
            "{} loads for {} buses",
            load_mw.len(),
            case.num_buses()
        )));
    }
    Ok(())
}

/// Fixed part of the nodal injection: `p_min` of every unit plus wind minus load.
fn base_injection(case: &SystemCase, wind_mw: &[f64], load_mw: &[f64]) -> Vec<f64> {
    let mut inj: Vec<f64> = load_mw.iter().map(|l| -l).collect();
    for g in &case.generators {
        inj[g.bus] += g.p_min;
    }
    for (w, unit) in case.wind_units.iter().enumerate() {
        inj[unit.bus] += wind_mw[w];
    }
    inj
}

pub fn dcopf_lp(
    case: &SystemCase,
    matrices: &GridMatrices,
    wind_mw: &[f64],
    load_mw: &[f64],
    enforce_limits: bool,
    segments: usize,
) -> Result<DcopfLp, DcopfError> {
    check_dims(case, wind_mw, load_mw)?;
    let mut p = LpProblem::new(0);
    let pwl: Vec<PwlCost> = case.generators.iter().map(|g| pwl_cost(g, segments)).collect();
    let mut var_of = Vec::with_capacity(case.num_generators());
    for curve in &pwl {
        let vars: Vec<usize> = (0..curve.segments())
            .map(|k| p.add_var(curve.slopes[k], 0.0, curve.width(k)))
            .collect();
        var_of.push(vars);
    }
    let base = base_injection(case, wind_mw, load_mw);
    let all: Vec<(usize, f64)> = var_of.iter().flatten().map(|&v| (v, 1.0)).collect();
    p.add_eq(&all, -base.iter().sum::<f64>());
    if enforce_limits {
        let fixed = matrices.flows_from_injections(&base);
        for (l, line) in case.lines.iter().enumerate() {
            let mut terms = Vec::new();
            for (g, gen) in case.generators.iter().enumerate() {
                let coef = matrices.ptdf[(l, gen.bus)];
                if coef != 0.0 {
                    terms.extend(var_of[g].iter().map(|&v| (v, coef)));
                }
            }
            p.add_le(&terms, line.limit_mw - fixed[l]);
            p.add_ge(&terms, -line.limit_mw - fixed[l]);
        }
    }
    Ok(DcopfLp {
        problem: p,
        cost_offset: pwl.iter().map(|c| c.base_cost).sum(),
        pwl,
        var_of,
    })
}

pub fn solve_dcopf(
    case: &SystemCase,
    matrices: &GridMatrices,
    wind_mw: &[f64],
    load_mw: &[f64],
    enforce_limits: bool,
    segments: usize,
) -> Result<DcopfResult, DcopfError> {
    let model = dcopf_lp(case, matrices, wind_mw, load_mw, enforce_limits, segments)?;
    let sol = solve_lp(&model.problem)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Ok(DcopfResult {
                status: DcopfStatus::Infeasible,
                dispatch: Vec::new(),
                angles: Vec::new(),
                flows: Vec::new(),
                injections: Vec::new(),
                objective: f64::NAN,
            })
        }
        other => return Err(DcopfError::Solver(other)),
    }
    let dispatch: Vec<f64> = case
        .generators
        .iter()
        .zip(&model.var_of)
        .map(|(g, vars)| g.p_min + vars.iter().map(|&v| sol.x[v]).sum::<f64>())
        .collect();
    let injections = net_injections(case, &dispatch, wind_mw, load_mw);
    let angles = matrices.angles(&injections);
    let flows = matrices.flows_from_angles(&angles);
    Ok(DcopfResult {
        status: DcopfStatus::Optimal,
        dispatch,
        angles,
        flows,
        injections,
        objective: sol.objective + model.cost_offset,
    })
}

/// Per-bus `sum(p_g) + wind - load`, MW.
pub fn net_injections(case: &SystemCase, dispatch: &[f64], wind_mw: &[f64], load_mw: &[f64]) -> Vec<f64> {
    let mut inj: Vec<f64> = load_mw.iter().map(|l| -l).collect();
    for (g, gen) in case.generators.iter().enumerate() {
        inj[gen.bus] += dispatch[g];
    }
    for (w, unit) in case.wind_units.iter().enumerate() {
        inj[unit.bus] += wind_mw[w];
    }
    inj
}

pub fn check_feasibility(case: &SystemCase, flows: &[f64]) -> Result<FeasibilityLabel, DcopfError> {
    check_feasibility_tol(case, flows, FEASIBILITY_TOL_MW)
}

pub fn check_feasibility_tol(
    case: &SystemCase,
    flows: &[f64],
    tol: f64,
) -> Result<FeasibilityLabel, DcopfError> {
    if flows.len() != case.num_lines() {
        return Err(DcopfError::DimensionMismatch(format!(
            "{} flows for {} lines",
            flows.len(),
            case.num_lines()
        )));
    }
    let mut worst: f64 = 0.0;
    let mut violating = Vec::new();
    for (l, (f, line)) in flows.iter().zip(&case.lines).enumerate() {
        let over = f.abs() - line.limit_mw;
        worst = worst.max(over);
        if over > tol {
            violating.push(l);
        }
    }
    Ok(FeasibilityLabel {
        label: if violating.is_empty() {
            Label::Feasible
        } else {
            Label::Infeasible
        },
        worst_violation: worst.max(0.0),
        violating_lines: violating,
    })
}
