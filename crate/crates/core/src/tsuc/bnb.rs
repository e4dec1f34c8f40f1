use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::Instant;

use super::model::{build_milp, TsucModel};
use super::{Schedule, SolveStats, TsucError, TsucInstance, TsucSolution};
use crate::dcopf::net_injections;
use crate::lp::{Basis, LpSolution, LpStatus, SimplexEngine, SimplexOptions};

const INT_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Stop once `(incumbent - bound) / |incumbent|` is at most this.
    pub gap_tol: f64,
    pub node_limit: usize,
    pub simplex: SimplexOptions,
    /// Run the rounding heuristic every this many nodes (0 disables it past the root).
    pub heuristic_every: usize,
    /// Open nodes beyond this warm-start from the root basis instead of
    /// keeping their parent's.
    pub max_stored_bases: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-6,
            node_limit: 100_000,
            simplex: SimplexOptions::default(),
            heuristic_every: 50,
            max_stored_bases: 4096,
        }
    }
}

struct Node {
    id: usize,
    bound: f64,
    /// Per binary: -1 free, 0 or 1 fixed.
    fixed: Vec<i8>,
    basis: Option<Arc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap: the smallest bound, then the smallest id, comes out first
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.id.cmp(&self.id))
    }
}

pub fn solve_tsuc(inst: &TsucInstance, opts: &SolveOptions) -> Result<TsucSolution, TsucError> {
    let model = build_milp(inst)?;
    solve_model(inst, &model, opts)
}

struct Search<'a> {
    inst: &'a TsucInstance,
    model: &'a TsucModel,
    engine: SimplexEngine,
    opts: &'a SolveOptions,
    stats: SolveStats,
    incumbent: Option<(f64, Vec<f64>)>,
}

impl Search<'_> {
    fn lp(&mut self, lo: &[f64], hi: &[f64], warm: Option<&Basis>) -> LpSolution {
        let sol = self.engine.solve(lo, hi, warm, &self.opts.simplex);
        self.stats.lp_solves += 1;
        self.stats.lp_iterations += sol.iterations;
        sol
    }

    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((v, _)) => v - self.opts.gap_tol * v.abs(),
            None => f64::INFINITY,
        }
    }

    fn offer(&mut self, obj: f64, x: Vec<f64>) {
        if self.incumbent.as_ref().is_none_or(|(v, _)| obj < *v) {
            log::debug!("incumbent {obj:.6} after {} nodes", self.stats.nodes);
            self.incumbent = Some((obj, x));
        }
    }

    /// Rounds the commitment in `x`, repairs min up/down windows, and
    /// dispatches the fixed schedule.
    fn round_and_dispatch(&mut self, x: &[f64], threshold: f64, warm: Option<&Basis>) {
        let lay = &self.model.layout;
        let u: Vec<Vec<bool>> = (0..lay.gens)
            .map(|g| (0..lay.horizon).map(|t| x[lay.u(g, t)] > threshold).collect())
            .collect();
        let sch = Schedule::from_commitment(repair_commitment(self.inst, u), &self.inst.initial_status);
        let (lo, hi) = fixed_bounds(self.model, &sch);
        let sol = self.lp(&lo, &hi, warm);
        if sol.is_optimal() {
            self.offer(sol.objective, sol.x);
        }
    }
}

/// Bounds with every binary fixed to `sch`.
pub(super) fn fixed_bounds(model: &TsucModel, sch: &Schedule) -> (Vec<f64>, Vec<f64>) {
    let lay = &model.layout;
    let mut lo = model.lp.lower.clone();
    let mut hi = model.lp.upper.clone();
    for g in 0..lay.gens {
        for t in 0..lay.horizon {
            for (v, on) in [(lay.u(g, t), sch.u[g][t]), (lay.y(g, t), sch.y[g][t]), (lay.z(g, t), sch.z[g][t])] {
                let val = if on { 1.0 } else { 0.0 };
                lo[v] = val;
                hi[v] = val;
            }
        }
    }
    (lo, hi)
}

/// Turns units on until every startup and shutdown respects its window:
/// short off-gaps are filled, short on-runs are extended.
fn repair_commitment(inst: &TsucInstance, mut u: Vec<Vec<bool>>) -> Vec<Vec<bool>> {
    let nt = inst.horizon;
    for (g, gen) in inst.case.generators.iter().enumerate() {
        loop {
            let mut changed = false;
            for t in 0..nt {
                let prev = if t == 0 { inst.initial_status[g] } else { u[g][t - 1] };
                if u[g][t] && !prev {
                    for tau in t..(t + gen.min_up).min(nt) {
                        changed |= !std::mem::replace(&mut u[g][tau], true);
                    }
                } else if !u[g][t] && prev {
                    let end = (t + gen.min_down).min(nt);
                    if (t..end).any(|k| u[g][k]) {
                        for k in t..end {
                            changed |= !std::mem::replace(&mut u[g][k], true);
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
    u
}

pub(super) fn solve_model(
    inst: &TsucInstance,
    model: &TsucModel,
    opts: &SolveOptions,
) -> Result<TsucSolution, TsucError> {
    let start = Instant::now();
    let nb = model.layout.num_binaries();
    let mut s = Search {
        inst,
        model,
        engine: SimplexEngine::new(&model.lp)?,
        opts,
        stats: SolveStats::default(),
        incumbent: None,
    };

    let base_lo = model.lp.lower.clone();
    let base_hi = model.lp.upper.clone();
    let root = s.lp(&base_lo, &base_hi, None);
    match root.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(TsucError::Infeasible),
        other => return Err(TsucError::Solver(other)),
    }
    s.stats.root_bound = root.objective;
    let root_basis = root.basis.clone().map(Arc::new);
    s.round_and_dispatch(&root.x, INT_TOL, root_basis.as_deref());
    s.round_and_dispatch(&root.x, 0.5, root_basis.as_deref());

    let mut heap = BinaryHeap::new();
    let mut next_id = 0;
    heap.push(Node {
        id: next_id,
        bound: root.objective,
        fixed: vec![-1; nb],
        basis: root_basis.clone(),
    });
    next_id += 1;
    let mut pending_root = Some(root);
    let mut lower_bound = s.stats.root_bound;

    while let Some(node) = heap.pop() {
        lower_bound = node.bound;
        if node.bound >= s.cutoff() {
            heap.push(node);
            break;
        }
        if s.stats.nodes >= opts.node_limit {
            s.stats.node_limit_hit = true;
            heap.push(node);
            break;
        }
        s.stats.nodes += 1;
        let sol = match pending_root.take() {
            Some(r) => r,
            None => {
                let mut lo = base_lo.clone();
                let mut hi = base_hi.clone();
                for (v, &f) in node.fixed.iter().enumerate() {
                    if f >= 0 {
                        lo[v] = f as f64;
                        hi[v] = f as f64;
                    }
                }
                let warm = node.basis.as_deref().or(root_basis.as_deref());
                s.lp(&lo, &hi, warm)
            }
        };
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            other => {
                log::warn!("node {} LP ended with {other:?}; pruned", node.id);
                continue;
            }
        }
        if sol.objective >= s.cutoff() {
            continue;
        }
        let Some(branch) = most_fractional(model, &sol.x) else {
            s.offer(sol.objective, sol.x);
            continue;
        };
        if opts.heuristic_every > 0 && s.stats.nodes % opts.heuristic_every == 0 {
            s.round_and_dispatch(&sol.x, 0.5, sol.basis.as_ref());
        }
        let basis = if heap.len() < opts.max_stored_bases {
            sol.basis.map(Arc::new)
        } else {
            None
        };
        for val in [0i8, 1] {
            let mut fixed = node.fixed.clone();
            fixed[branch] = val;
            heap.push(Node {
                id: next_id,
                bound: sol.objective,
                fixed,
                basis: basis.clone(),
            });
            next_id += 1;
        }
    }

    let Some((objective, x)) = s.incumbent.take() else {
        return Err(if s.stats.node_limit_hit {
            TsucError::InvalidInstance(format!("node limit {} reached without a feasible schedule", opts.node_limit))
        } else {
            TsucError::Infeasible
        });
    };
    let bound = if heap.is_empty() { objective } else { lower_bound.min(objective) };
    s.stats.gap = (objective - bound).max(0.0) / objective.abs().max(1e-10);
    s.stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(extract_solution(inst, model, &x, objective, s.stats))
}

/// Binary with the largest distance to an integer; ties go to the earlier
/// hour, then the lower unit index, then u before y before z.
fn most_fractional(model: &TsucModel, x: &[f64]) -> Option<usize> {
    let lay = &model.layout;
    let mut best: Option<(f64, usize)> = None;
    for t in 0..lay.horizon {
        for g in 0..lay.gens {
            for v in [lay.u(g, t), lay.y(g, t), lay.z(g, t)] {
                let f = x[v] - x[v].floor();
                let score = f.min(1.0 - f);
                if score > INT_TOL && best.is_none_or(|(b, _)| score > b) {
                    best = Some((score, v));
                }
            }
        }
    }
    best.map(|(_, v)| v)
}

pub(super) fn extract_solution(
    inst: &TsucInstance,
    model: &TsucModel,
    x: &[f64],
    objective: f64,
    stats: SolveStats,
) -> TsucSolution {
    let lay = &model.layout;
    let bits = |f: &dyn Fn(usize, usize) -> usize| -> Vec<Vec<bool>> {
        (0..lay.gens)
            .map(|g| (0..lay.horizon).map(|t| x[f(g, t)] > 0.5).collect())
            .collect()
    };
    let schedule = Schedule {
        u: bits(&|g, t| lay.u(g, t)),
        y: bits(&|g, t| lay.y(g, t)),
        z: bits(&|g, t| lay.z(g, t)),
    };
    let mut dispatch = Vec::with_capacity(lay.scenarios);
    let mut angles = Vec::with_capacity(lay.scenarios);
    for (s, sc) in inst.scenarios.iter().enumerate() {
        let mut ds = Vec::with_capacity(lay.horizon);
        let mut a = Vec::with_capacity(lay.horizon);
        for t in 0..lay.horizon {
            let p: Vec<f64> = (0..lay.gens)
                .map(|g| if schedule.u[g][t] { x[lay.p(g, s, t)] } else { 0.0 })
                .collect();
            let inj = net_injections(&inst.case, &p, &sc.wind_mw[t], &sc.load_mw(&inst.case, t));
            a.push(model.matrices.angles(&inj));
            ds.push(p);
        }
        dispatch.push(ds);
        angles.push(a);
    }
    TsucSolution {
        schedule,
        dispatch,
        angles,
        objective,
        stats,
        counts: model.counts,
        mode: inst.mode.name(),
    }
}
