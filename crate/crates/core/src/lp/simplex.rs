//! Bounded-variable revised primal simplex.
//!
//! Every row gets a slack (`a_i x + s_i = b_i`, `s_i in [0, 0]` for equalities
//! and `[0, inf)` for `<=` rows), so the all-slack basis is always available.
//! Phase 1 minimizes the sum of bound violations of basic variables (composite
//! method), which also lets a solve start from any warm basis after bounds move.
//! Entering variables are chosen by largest reduced cost until the iteration
//! count passes `2 (m + n)`, then by Bland's smallest-index rule.
//!
//! A warm basis that is still dual feasible (the usual case after a bound
//! change) is first repaired by dual simplex pivots; the primal loop then
//! confirms optimality or takes over if the dual pass gives up.

use super::lu::{BasisFactor, ColumnSet, SparseLu};
use super::problem::{normalize_bound, Basis, LpProblem, LpSolution, LpStatus};
use super::LpError;

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    /// LU pivots at or below this magnitude are rejected.
    pub pivot_tol: f64,
    /// Smallest `|alpha_i|` admitted in the ratio test.
    pub ratio_tol: f64,
    /// `None` means `2 (m + n)`.
    pub bland_after: Option<usize>,
    /// `None` means `50 (m + n) + 10_000`.
    pub max_iterations: Option<usize>,
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-6,
            pivot_tol: 1e-12,
            ratio_tol: 1e-9,
            bland_after: None,
            max_iterations: None,
            refactor_every: 100,
        }
    }
}

/// Solves `p` from the all-slack basis with default options.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution, LpError> {
    solve_lp_with(p, &SimplexOptions::default())
}

pub fn solve_lp_with(p: &LpProblem, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    let engine = SimplexEngine::new(p)?;
    Ok(engine.solve(&p.lower, &p.upper, None, opts))
}

/// Matrix data of one problem, prepared once and re-solved under different
/// variable bounds (branch-and-bound nodes share one engine).
#[derive(Clone, Debug)]
pub struct SimplexEngine {
    n: usize,
    m: usize,
    neq: usize,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    unit_rows: Vec<usize>,
    ones: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

struct State<'a> {
    eng: &'a SimplexEngine,
    opts: &'a SimplexOptions,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    basic: Vec<usize>,
    pos_of: Vec<usize>,
    at_upper: Vec<bool>,
    factor: BasisFactor,
    iterations: usize,
    bland: bool,
    warm: bool,
}

enum DualOutcome {
    PrimalFeasible,
    Infeasible,
    GaveUp,
}

const NONBASIC: usize = usize::MAX;

impl SimplexEngine {
    pub fn new(p: &LpProblem) -> Result<Self, LpError> {
        p.validate()?;
        let n = p.num_vars();
        let m = p.num_rows();
        let neq = p.eq_rows.len();
        let mut counts = vec![0usize; n];
        for row in p.eq_rows.iter().chain(&p.le_rows) {
            for &j in &row.idx {
                counts[j] += 1;
            }
        }
        let mut col_start = vec![0usize; n + 1];
        for j in 0..n {
            col_start[j + 1] = col_start[j] + counts[j];
        }
        let nnz = col_start[n];
        let mut col_row = vec![0usize; nnz];
        let mut col_val = vec![0.0; nnz];
        let mut fill = col_start.clone();
        for (i, row) in p.eq_rows.iter().chain(&p.le_rows).enumerate() {
            for (&j, &v) in row.idx.iter().zip(&row.val) {
                col_row[fill[j]] = i;
                col_val[fill[j]] = v;
                fill[j] += 1;
            }
        }
        let rhs = p.eq_rhs.iter().chain(&p.le_rhs).copied().collect();
        Ok(Self {
            n,
            m,
            neq,
            cost: p.objective.clone(),
            rhs,
            col_start,
            col_row,
            col_val,
            unit_rows: (0..m).collect(),
            ones: vec![1.0; m],
        })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    fn column(&self, j: usize) -> (&[usize], &[f64]) {
        if j < self.n {
            let r = self.col_start[j]..self.col_start[j + 1];
            (&self.col_row[r.clone()], &self.col_val[r])
        } else {
            let i = j - self.n;
            (&self.unit_rows[i..i + 1], &self.ones[i..i + 1])
        }
    }

    fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            let mut s = 0.0;
            for p in self.col_start[j]..self.col_start[j + 1] {
                s += self.col_val[p] * y[self.col_row[p]];
            }
            s
        } else {
            y[j - self.n]
        }
    }

    fn cost_of(&self, j: usize) -> f64 {
        if j < self.n {
            self.cost[j]
        } else {
            0.0
        }
    }

    /// Solves under the given structural bounds, optionally starting from `warm`.
    pub fn solve(
        &self,
        lower: &[f64],
        upper: &[f64],
        warm: Option<&Basis>,
        opts: &SimplexOptions,
    ) -> LpSolution {
        let (n, m) = (self.n, self.m);
        assert_eq!(lower.len(), n);
        assert_eq!(upper.len(), n);
        let mut lo: Vec<f64> = lower.iter().map(|&v| normalize_bound(v)).collect();
        let mut hi: Vec<f64> = upper.iter().map(|&v| normalize_bound(v)).collect();
        for i in 0..m {
            lo.push(0.0);
            hi.push(if i < self.neq { 0.0 } else { f64::INFINITY });
        }
        if (0..n).any(|j| lo[j] > hi[j]) {
            return LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                duals: vec![0.0; m],
                objective: f64::NAN,
                iterations: 0,
                basis: None,
            };
        }

        let mut st = State {
            eng: self,
            opts,
            lo,
            hi,
            x: vec![0.0; n + m],
            basic: (n..n + m).collect(),
            pos_of: vec![NONBASIC; n + m],
            at_upper: vec![false; n + m],
            factor: BasisFactor::default(),
            iterations: 0,
            bland: false,
            warm: false,
        };
        let warm_ok = warm.is_some_and(|b| {
            b.basic.len() == m
                && b.at_upper.len() == n + m
                && b.basic.iter().all(|&j| j < n + m)
                && {
                    let mut seen = vec![false; n + m];
                    b.basic.iter().all(|&j| !std::mem::replace(&mut seen[j], true))
                }
        });
        if let (true, Some(b)) = (warm_ok, warm) {
            st.basic = b.basic.clone();
            st.at_upper = b.at_upper.clone();
            st.warm = true;
        } else {
            for j in 0..n {
                st.at_upper[j] = !st.lo[j].is_finite() && st.hi[j].is_finite();
            }
        }
        for (p, &j) in st.basic.iter().enumerate() {
            st.pos_of[j] = p;
        }
        st.run()
    }
}

impl State<'_> {
    fn nonbasic_value(&self, j: usize) -> f64 {
        let (lo, hi) = (self.lo[j], self.hi[j]);
        if self.at_upper[j] && hi.is_finite() {
            hi
        } else if lo.is_finite() {
            lo
        } else if hi.is_finite() {
            hi
        } else {
            0.0
        }
    }

    /// Factorizes the current basis, swapping in slacks for any dependent
    /// columns, then recomputes the basic values.
    fn refactor(&mut self) {
        let eng = self.eng;
        let m = eng.m;
        loop {
            let mut cols = ColumnSet {
                idx: Vec::with_capacity(m),
                val: Vec::with_capacity(m),
            };
            for &j in &self.basic {
                let (i, v) = eng.column(j);
                cols.idx.push(i);
                cols.val.push(v);
            }
            match SparseLu::factor(m, &cols, self.opts.pivot_tol) {
                Ok(lu) => {
                    self.factor = BasisFactor::new(lu);
                    break;
                }
                Err(sing) => {
                    // evict every dependent column first: a slack of an
                    // unpivoted row may itself be among them
                    for &pos in &sing.cols {
                        let out = self.basic[pos];
                        self.pos_of[out] = NONBASIC;
                        self.at_upper[out] = self.hi[out].is_finite()
                            && (!self.lo[out].is_finite()
                                || self.x[out] > 0.5 * (self.lo[out] + self.hi[out]));
                    }
                    for (&pos, &row) in sing.cols.iter().zip(&sing.rows) {
                        let slack = eng.n + row;
                        self.basic[pos] = slack;
                        self.pos_of[slack] = pos;
                        self.at_upper[slack] = false;
                    }
                }
            }
        }
        self.recompute_basics();
    }

    fn recompute_basics(&mut self) {
        let eng = self.eng;
        let mut r = eng.rhs.clone();
        for j in 0..eng.n + eng.m {
            if self.pos_of[j] != NONBASIC {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v != 0.0 {
                let (idx, val) = eng.column(j);
                for (&i, &a) in idx.iter().zip(val) {
                    r[i] -= a * v;
                }
            }
        }
        self.factor.ftran(&mut r);
        for (p, &j) in self.basic.iter().enumerate() {
            self.x[j] = r[p];
        }
    }

    fn phase_costs(&self) -> (Phase, Vec<f64>, f64) {
        let tol = self.opts.feasibility_tol;
        let mut infeas = 0.0;
        let mut cb = vec![0.0; self.eng.m];
        for (p, &j) in self.basic.iter().enumerate() {
            let v = self.x[j];
            if v < self.lo[j] - tol {
                cb[p] = -1.0;
                infeas += self.lo[j] - v;
            } else if v > self.hi[j] + tol {
                cb[p] = 1.0;
                infeas += v - self.hi[j];
            }
        }
        if infeas > 0.0 {
            (Phase::One, cb, infeas)
        } else {
            for (p, &j) in self.basic.iter().enumerate() {
                cb[p] = self.eng.cost_of(j);
            }
            (Phase::Two, cb, 0.0)
        }
    }

    /// Picks the entering variable; returns `(var, reduced cost)`.
    fn price(&self, phase: Phase, y: &[f64]) -> Option<(usize, f64)> {
        let eng = self.eng;
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..eng.n + eng.m {
            if self.pos_of[j] != NONBASIC || self.lo[j] == self.hi[j] {
                continue;
            }
            let c = if phase == Phase::Two { eng.cost_of(j) } else { 0.0 };
            let d = c - eng.dot_column(j, y);
            let lo_inf = !self.lo[j].is_finite();
            let hi_inf = !self.hi[j].is_finite();
            let free = lo_inf && hi_inf;
            let at_up = !free && (self.at_upper[j] && !hi_inf || lo_inf);
            let eligible = if free {
                d.abs() > tol
            } else if at_up {
                d > tol
            } else {
                d < -tol
            };
            if !eligible {
                continue;
            }
            if self.bland {
                return Some((j, d));
            }
            if best.is_none_or(|(_, bd)| d.abs() > bd.abs()) {
                best = Some((j, d));
            }
        }
        best
    }

    fn run(mut self) -> LpSolution {
        let eng = self.eng;
        let (n, m) = (eng.n, eng.m);
        let bland_after = self.opts.bland_after.unwrap_or(2 * (m + n));
        let max_iter = self.opts.max_iterations.unwrap_or(50 * (m + n) + 10_000);
        self.refactor();
        if self.warm {
            match self.dual() {
                DualOutcome::Infeasible => return self.finish(LpStatus::Infeasible),
                DualOutcome::PrimalFeasible | DualOutcome::GaveUp => {}
            }
        }
        let mut alpha = vec![0.0; m];
        let mut verified = false;
        let mut stall_refactors = 0;

        let status = loop {
            if self.iterations >= max_iter {
                break LpStatus::IterationLimit;
            }
            if self.factor.num_updates() >= self.opts.refactor_every || self.factor.is_bloated() {
                self.refactor();
            }
            self.bland = self.iterations >= bland_after;

            let (phase, mut y, _infeas) = self.phase_costs();
            self.factor.btran(&mut y);
            let Some((q, dq)) = self.price(phase, &y) else {
                if !verified {
                    // confirm on a fresh factorization before declaring the result
                    verified = true;
                    self.refactor();
                    continue;
                }
                break if phase == Phase::One {
                    LpStatus::Infeasible
                } else {
                    LpStatus::Optimal
                };
            };
            verified = false;

            alpha.iter_mut().for_each(|v| *v = 0.0);
            let (idx, val) = eng.column(q);
            for (&i, &a) in idx.iter().zip(val) {
                alpha[i] = a;
            }
            self.factor.ftran(&mut alpha);

            let dir = if dq < 0.0 { 1.0 } else { -1.0 };
            let tol = self.opts.feasibility_tol;
            let mut theta = self.hi[q] - self.lo[q];
            // (position, leaves at upper)
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_alpha = 0.0;
            for p in 0..m {
                let a = alpha[p];
                if a.abs() <= self.opts.ratio_tol {
                    continue;
                }
                let j = self.basic[p];
                let rate = -dir * a;
                let v = self.x[j];
                let (t, up) = if rate < 0.0 {
                    if v > self.hi[j] + tol {
                        ((v - self.hi[j]) / -rate, true)
                    } else if v >= self.lo[j] - tol && self.lo[j].is_finite() {
                        (((v - self.lo[j]) / -rate).max(0.0), false)
                    } else {
                        continue;
                    }
                } else if v < self.lo[j] - tol {
                    ((self.lo[j] - v) / rate, false)
                } else if v <= self.hi[j] + tol && self.hi[j].is_finite() {
                    (((self.hi[j] - v) / rate).max(0.0), true)
                } else {
                    continue;
                };
                let replace = match leave {
                    None => t < theta,
                    Some((lp, _)) => {
                        let scale = 1e-12 * (1.0 + theta.abs());
                        if t < theta - scale {
                            true
                        } else if t <= theta + scale {
                            if self.bland {
                                j < self.basic[lp]
                            } else {
                                a.abs() > leave_alpha
                            }
                        } else {
                            false
                        }
                    }
                };
                if replace {
                    theta = t.min(theta);
                    leave = Some((p, up));
                    leave_alpha = a.abs();
                }
            }

            if !theta.is_finite() {
                if phase == Phase::Two {
                    break LpStatus::Unbounded;
                }
                stall_refactors += 1;
                if stall_refactors > 3 {
                    break LpStatus::Infeasible;
                }
                self.refactor();
                continue;
            }

            self.iterations += 1;
            if theta != 0.0 {
                self.x[q] += dir * theta;
                for p in 0..m {
                    if alpha[p] != 0.0 {
                        let j = self.basic[p];
                        self.x[j] -= dir * theta * alpha[p];
                    }
                }
            }
            match leave {
                None => {
                    // bound flip
                    self.at_upper[q] = dir > 0.0;
                    self.x[q] = self.nonbasic_value(q);
                }
                Some((p, up)) => {
                    let out = self.basic[p];
                    self.at_upper[out] = up;
                    self.pos_of[out] = NONBASIC;
                    self.x[out] = if up { self.hi[out] } else { self.lo[out] };
                    self.basic[p] = q;
                    self.pos_of[q] = p;
                    self.at_upper[q] = false;
                    self.factor.update(p, &alpha);
                }
            }
        };

        self.finish(status)
    }

    /// Reduced costs of every variable under the phase-2 costs (zero for basics).
    fn reduced_costs(&mut self) -> Vec<f64> {
        let eng = self.eng;
        let mut y: Vec<f64> = self.basic.iter().map(|&j| eng.cost_of(j)).collect();
        self.factor.btran(&mut y);
        (0..eng.n + eng.m)
            .map(|j| if self.pos_of[j] == NONBASIC { eng.cost_of(j) - eng.dot_column(j, &y) } else { 0.0 })
            .collect()
    }

    /// `Some(true)` when nonbasic `j` sits at its upper bound, `Some(false)` at
    /// its lower, `None` when free.
    fn side(&self, j: usize) -> Option<bool> {
        let (lo_inf, hi_inf) = (!self.lo[j].is_finite(), !self.hi[j].is_finite());
        if lo_inf && hi_inf {
            None
        } else {
            Some(self.at_upper[j] && !hi_inf || lo_inf)
        }
    }

    fn dual_feasible(&self, d: &[f64]) -> bool {
        let tol = self.opts.optimality_tol;
        (0..d.len()).all(|j| {
            if self.pos_of[j] != NONBASIC || self.lo[j] == self.hi[j] {
                return true;
            }
            match self.side(j) {
                None => d[j].abs() <= tol,
                Some(true) => d[j] <= tol,
                Some(false) => d[j] >= -tol,
            }
        })
    }

    /// Dual simplex from a dual-feasible basis. Entering variables may end up
    /// outside their own bounds; later pivots or the primal loop repair that.
    fn dual(&mut self) -> DualOutcome {
        let eng = self.eng;
        let (n, m) = (eng.n, eng.m);
        let ftol = self.opts.feasibility_tol;
        let otol = self.opts.optimality_tol;
        let mut d = self.reduced_costs();
        if !self.dual_feasible(&d) {
            return DualOutcome::GaveUp;
        }
        let limit = self.iterations + 10 * m + 1000;
        let mut rho = vec![0.0; m];
        let mut row = vec![0.0; n + m];
        let mut alpha = vec![0.0; m];
        let mut verified = false;
        loop {
            if self.iterations >= limit {
                return DualOutcome::GaveUp;
            }
            if self.factor.num_updates() >= self.opts.refactor_every || self.factor.is_bloated() {
                self.refactor();
                d = self.reduced_costs();
                if !self.dual_feasible(&d) {
                    return DualOutcome::GaveUp;
                }
            }
            // leaving row: largest bound violation
            let mut leave: Option<(usize, f64)> = None;
            for (p, &j) in self.basic.iter().enumerate() {
                let v = self.x[j];
                let viol = if v < self.lo[j] - ftol {
                    self.lo[j] - v
                } else if v > self.hi[j] + ftol {
                    v - self.hi[j]
                } else {
                    continue;
                };
                if leave.is_none_or(|(_, b)| viol > b) {
                    leave = Some((p, viol));
                }
            }
            let Some((r, _)) = leave else {
                return DualOutcome::PrimalFeasible;
            };
            let out = self.basic[r];
            let below = self.x[out] < self.lo[out];

            rho.iter_mut().for_each(|v| *v = 0.0);
            rho[r] = 1.0;
            self.factor.btran(&mut rho);
            // entering: smallest |d_j / alpha_rj| among moves that push x_out back
            let mut enter: Option<(usize, f64, f64)> = None;
            for j in 0..n + m {
                if self.pos_of[j] != NONBASIC || self.lo[j] == self.hi[j] {
                    row[j] = 0.0;
                    continue;
                }
                let a = eng.dot_column(j, &rho);
                row[j] = a;
                if a.abs() <= self.opts.ratio_tol {
                    continue;
                }
                // x_out moves by -a per unit increase of x_j
                let ok = match self.side(j) {
                    None => true,
                    Some(up) => (below == (a < 0.0)) != up,
                };
                if !ok {
                    continue;
                }
                let ratio = (d[j] / a).abs();
                let better = match enter {
                    None => true,
                    Some((_, br, ba)) => {
                        ratio < br - otol * 1e-3 || (ratio <= br + otol * 1e-3 && a.abs() > ba.abs())
                    }
                };
                if better {
                    enter = Some((j, ratio, a));
                }
            }
            let Some((q, _, arq)) = enter else {
                if !verified {
                    verified = true;
                    self.refactor();
                    d = self.reduced_costs();
                    if !self.dual_feasible(&d) {
                        return DualOutcome::GaveUp;
                    }
                    continue;
                }
                return DualOutcome::Infeasible;
            };
            verified = false;

            alpha.iter_mut().for_each(|v| *v = 0.0);
            let (idx, val) = eng.column(q);
            for (&i, &a) in idx.iter().zip(val) {
                alpha[i] = a;
            }
            self.factor.ftran(&mut alpha);
            if (alpha[r] - arq).abs() > 1e-7 * (1.0 + arq.abs()) {
                // row and column disagree: refresh the factorization
                self.refactor();
                d = self.reduced_costs();
                if !self.dual_feasible(&d) {
                    return DualOutcome::GaveUp;
                }
                continue;
            }

            let target = if below { self.lo[out] } else { self.hi[out] };
            let t = (self.x[out] - target) / alpha[r];
            self.x[q] += t;
            for p in 0..m {
                if alpha[p] != 0.0 {
                    let j = self.basic[p];
                    self.x[j] -= t * alpha[p];
                }
            }
            let theta = d[q] / arq;
            for j in 0..n + m {
                if row[j] != 0.0 {
                    d[j] -= theta * row[j];
                }
            }
            d[q] = 0.0;
            d[out] = -theta;

            self.iterations += 1;
            self.at_upper[out] = !below;
            self.pos_of[out] = NONBASIC;
            self.x[out] = target;
            self.basic[r] = q;
            self.pos_of[q] = r;
            self.at_upper[q] = false;
            self.factor.update(r, &alpha);
        }
    }

    fn finish(mut self, status: LpStatus) -> LpSolution {
        let eng = self.eng;
        let (n, m) = (eng.n, eng.m);
        let mut y: Vec<f64> = self.basic.iter().map(|&j| eng.cost_of(j)).collect();
        self.factor.btran(&mut y);
        let x: Vec<f64> = self.x[..n].to_vec();
        let objective = eng.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        let mut at_upper = self.at_upper.clone();
        for &j in &self.basic {
            at_upper[j] = false;
        }
        LpSolution {
            status,
            x,
            duals: if status == LpStatus::Optimal { y } else { vec![0.0; m] },
            objective,
            iterations: self.iterations,
            basis: Some(Basis {
                basic: self.basic,
                at_upper,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::dense::DenseMatrix;

    fn check_optimal(p: &LpProblem, s: &LpSolution) {
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(p.primal_residual(&s.x) <= 1e-7, "primal residual {}", p.primal_residual(&s.x));
        assert!(s.complementary_slackness_residual(p) <= 1e-6);
        assert!(s.duality_gap(p) <= 1e-6 * (1.0 + s.objective.abs()));
    }

    #[test]
    fn single_variable_with_bounds() {
        // min x s.t. x >= 1, x <= 2
        let mut p = LpProblem::new(1);
        p.objective[0] = 1.0;
        p.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        p.add_ge(&[(0, 1.0)], 1.0);
        p.add_le(&[(0, 1.0)], 2.0);
        let s = solve_lp(&p).unwrap();
        check_optimal(&p, &s);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_simplex_facet() {
        let mut p = LpProblem::new(2);
        p.objective = vec![-1.0, -1.0];
        p.add_le(&[(0, 1.0), (1, 1.0)], 1.0);
        let s = solve_lp(&p).unwrap();
        check_optimal(&p, &s);
        assert!((s.objective + 1.0).abs() < 1e-12);
        assert!((s.x[0] + s.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible() {
        let mut p = LpProblem::new(2);
        p.add_le(&[(0, 1.0), (1, 1.0)], 1.0);
        p.add_ge(&[(0, 1.0), (1, 1.0)], 2.0);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut p = LpProblem::new(2);
        p.objective = vec![-1.0, 0.0];
        p.add_le(&[(0, 1.0), (1, -1.0)], 1.0);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_rows_and_free_variables() {
        // min x + 2y s.t. x + y = 3, x - y = 1, both free
        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, 2.0];
        p.set_bounds(0, -1e20, 1e20);
        p.set_bounds(1, -1e20, 1e20);
        p.add_eq(&[(0, 1.0), (1, 1.0)], 3.0);
        p.add_eq(&[(0, 1.0), (1, -1.0)], 1.0);
        let s = solve_lp(&p).unwrap();
        check_optimal(&p, &s);
        assert!((s.x[0] - 2.0).abs() < 1e-10 && (s.x[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Beale (1955): cycles under Dantzig's rule with lowest-index ties.
        // min -3/4 x4 + 150 x5 - 1/50 x6 + 6 x7
        let a = DenseMatrix::from_rows(&[
            vec![0.25, -60.0, -0.04, 9.0],
            vec![0.5, -90.0, -0.02, 3.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let p = LpProblem::from_dense(
            vec![-0.75, 150.0, -0.02, 6.0],
            None,
            Some((&a, &[0.0, 0.0, 1.0])),
            vec![0.0; 4],
            vec![f64::INFINITY; 4],
        )
        .unwrap();
        for bland_after in [Some(0), Some(5), None] {
            let opts = SimplexOptions {
                bland_after,
                ..Default::default()
            };
            let s = solve_lp_with(&p, &opts).unwrap();
            check_optimal(&p, &s);
            assert!((s.objective + 0.05).abs() < 1e-10, "objective {}", s.objective);
        }
    }

    #[test]
    fn warm_start_after_bound_change() {
        let mut p = LpProblem::new(3);
        p.objective = vec![-1.0, -2.0, -3.0];
        p.add_le(&[(0, 1.0), (1, 1.0), (2, 1.0)], 4.0);
        p.add_le(&[(0, 1.0), (2, 2.0)], 5.0);
        for j in 0..3 {
            p.set_bounds(j, 0.0, 3.0);
        }
        let eng = SimplexEngine::new(&p).unwrap();
        let opts = SimplexOptions::default();
        let first = eng.solve(&p.lower, &p.upper, None, &opts);
        assert!(first.is_optimal());
        let mut hi = p.upper.clone();
        hi[2] = 1.0;
        let warm = eng.solve(&p.lower, &hi, first.basis.as_ref(), &opts);
        let cold = eng.solve(&p.lower, &hi, None, &opts);
        assert!(warm.is_optimal() && cold.is_optimal());
        assert!((warm.objective - cold.objective).abs() < 1e-10);
    }

    #[test]
    fn warm_start_detects_infeasible_bounds() {
        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, 1.0];
        p.add_eq(&[(0, 1.0), (1, 1.0)], 3.0);
        p.set_bounds(0, 0.0, 2.0);
        p.set_bounds(1, 0.0, 2.0);
        let eng = SimplexEngine::new(&p).unwrap();
        let opts = SimplexOptions::default();
        let first = eng.solve(&p.lower, &p.upper, None, &opts);
        assert!(first.is_optimal());
        let hi = vec![1.0, 1.0];
        let warm = eng.solve(&p.lower, &hi, first.basis.as_ref(), &opts);
        assert_eq!(warm.status, LpStatus::Infeasible);
        // and back to feasible from the infeasible basis
        let lo = vec![1.5, 0.0];
        let again = eng.solve(&lo, &p.upper, warm.basis.as_ref(), &opts);
        assert!(again.is_optimal());
        assert!((again.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let p = LpProblem::new(1);
        let eng = SimplexEngine::new(&p).unwrap();
        let s = eng.solve(&[2.0], &[1.0], None, &SimplexOptions::default());
        assert_eq!(s.status, LpStatus::Infeasible);
    }
}
