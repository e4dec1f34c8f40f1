use super::dense::DenseMatrix;
use super::LpError;

/// Bounds at or beyond this magnitude mean "no bound".
pub const INFINITE_BOUND: f64 = 1e18;

pub(crate) fn normalize_bound(v: f64) -> f64 {
    if v >= INFINITE_BOUND {
        f64::INFINITY
    } else if v <= -INFINITE_BOUND {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// A linear row stored as parallel index/value arrays.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseRow {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseRow {
    /// Builds a row from `(variable, coefficient)` terms, merging duplicates
    /// and dropping exact zeros.
    pub fn from_terms(terms: &[(usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, f64)> = terms.to_vec();
        sorted.sort_by_key(|t| t.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(sorted.len());
        for (j, v) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => merged.push((j, v)),
            }
        }
        let (idx, val) = merged.into_iter().filter(|t| t.1 != 0.0).unzip();
        SparseRow { idx, val }
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.idx.iter().zip(&self.val).map(|(&j, v)| v * x[j]).sum()
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }
}

/// `min c·x  s.t.  A_eq x = b_eq,  A_le x <= b_le,  lo <= x <= hi`.
#[derive(Clone, Debug, Default)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub eq_rows: Vec<SparseRow>,
    pub eq_rhs: Vec<f64>,
    pub le_rows: Vec<SparseRow>,
    pub le_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    /// `n` variables with zero cost and bounds `[0, +inf)`.
    pub fn new(n: usize) -> Self {
        Self {
            objective: vec![0.0; n],
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.eq_rows.len() + self.le_rows.len()
    }

    /// Appends a variable and returns its index.
    pub fn add_var(&mut self, cost: f64, lo: f64, hi: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lo);
        self.upper.push(hi);
        self.objective.len() - 1
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lower[j] = lo;
        self.upper[j] = hi;
    }

    pub fn add_eq(&mut self, terms: &[(usize, f64)], rhs: f64) -> usize {
        self.eq_rows.push(SparseRow::from_terms(terms));
        self.eq_rhs.push(rhs);
        self.eq_rows.len() - 1
    }

    pub fn add_le(&mut self, terms: &[(usize, f64)], rhs: f64) -> usize {
        self.le_rows.push(SparseRow::from_terms(terms));
        self.le_rhs.push(rhs);
        self.le_rows.len() - 1
    }

    /// `terms >= rhs`, stored as `-terms <= -rhs`.
    pub fn add_ge(&mut self, terms: &[(usize, f64)], rhs: f64) -> usize {
        let neg: Vec<(usize, f64)> = terms.iter().map(|&(j, v)| (j, -v)).collect();
        self.add_le(&neg, -rhs)
    }

    /// Builds a problem from dense matrices. Pass `None` for absent blocks.
    pub fn from_dense(
        objective: Vec<f64>,
        eq: Option<(&DenseMatrix, &[f64])>,
        le: Option<(&DenseMatrix, &[f64])>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, LpError> {
        let n = objective.len();
        let mut p = Self {
            objective,
            lower,
            upper,
            ..Default::default()
        };
        for (block, is_eq) in [(eq, true), (le, false)] {
            let Some((a, b)) = block else { continue };
            if a.cols() != n || a.rows() != b.len() {
                return Err(LpError::DimensionMismatch(format!(
                    "{}x{} constraint block with {} rhs entries and {n} variables",
                    a.rows(),
                    a.cols(),
                    b.len()
                )));
            }
            for i in 0..a.rows() {
                let terms: Vec<(usize, f64)> = a.row(i).iter().copied().enumerate().collect();
                if is_eq {
                    p.add_eq(&terms, b[i]);
                } else {
                    p.add_le(&terms, b[i]);
                }
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::DimensionMismatch(format!(
                "{n} objective entries but {} lower / {} upper bounds",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if self.eq_rows.len() != self.eq_rhs.len() || self.le_rows.len() != self.le_rhs.len() {
            return Err(LpError::DimensionMismatch("row/rhs count mismatch".into()));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::NonFinite(format!("objective coefficient {j}")));
        }
        for j in 0..n {
            let (lo, hi) = (normalize_bound(self.lower[j]), normalize_bound(self.upper[j]));
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
            {
                return Err(LpError::InvalidBounds { var: j, lo, hi });
            }
        }
        let rows = self.eq_rows.iter().zip(&self.eq_rhs).chain(self.le_rows.iter().zip(&self.le_rhs));
        for (i, (row, rhs)) in rows.enumerate() {
            if row.idx.len() != row.val.len() || row.idx.iter().any(|&j| j >= n) {
                return Err(LpError::DimensionMismatch(format!(
                    "row {i} references a variable outside 0..{n}"
                )));
            }
            if !rhs.is_finite() || row.val.iter().any(|v| !v.is_finite()) {
                return Err(LpError::NonFinite(format!("row {i}")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, rhs) in self.eq_rows.iter().zip(&self.eq_rhs) {
            worst = worst.max((row.dot(x) - rhs).abs());
        }
        for (row, rhs) in self.le_rows.iter().zip(&self.le_rhs) {
            worst = worst.max(row.dot(x) - rhs);
        }
        for j in 0..self.num_vars() {
            worst = worst.max(normalize_bound(self.lower[j]) - x[j]);
            worst = worst.max(x[j] - normalize_bound(self.upper[j]));
        }
        worst
    }

    /// Equality block as a dense matrix (for oracles and small problems).
    pub fn eq_dense(&self) -> DenseMatrix {
        dense_block(&self.eq_rows, self.num_vars())
    }

    pub fn le_dense(&self) -> DenseMatrix {
        dense_block(&self.le_rows, self.num_vars())
    }
}

fn dense_block(rows: &[SparseRow], n: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(rows.len(), n);
    for (i, row) in rows.iter().enumerate() {
        for (&j, &v) in row.idx.iter().zip(&row.val) {
            m[(i, j)] += v;
        }
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The iteration budget ran out; the returned point is the last basis.
    IterationLimit,
}

/// Final basis of a solve, reusable as a warm start when only bounds change.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    /// Variable index (structural `< n`, slack `n + row`) at each basis position.
    pub basic: Vec<usize>,
    /// For every variable: nonbasic at its upper bound.
    pub at_upper: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Row duals, equality rows first, then inequality rows. For a minimization,
    /// `y_i = d obj / d b_i`, so `<=` rows carry `y_i <= 0`.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub basis: Option<Basis>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Reduced costs `c - A^T y`.
    pub fn reduced_costs(&self, p: &LpProblem) -> Vec<f64> {
        let mut d = p.objective.clone();
        let rows = p.eq_rows.iter().chain(&p.le_rows);
        for (row, y) in rows.zip(&self.duals) {
            for (&j, &a) in row.idx.iter().zip(&row.val) {
                d[j] -= a * y;
            }
        }
        d
    }

    /// Dual objective `b·y + sum_j d_j x_j` with each reduced cost priced at the
    /// bound it sits on.
    pub fn dual_objective(&self, p: &LpProblem) -> f64 {
        let rhs = p.eq_rhs.iter().chain(&p.le_rhs);
        let by: f64 = rhs.zip(&self.duals).map(|(b, y)| b * y).sum();
        let d = self.reduced_costs(p);
        let dx: f64 = d
            .iter()
            .enumerate()
            .map(|(j, dj)| {
                if dj.abs() <= 1e-12 {
                    0.0
                } else if *dj > 0.0 {
                    dj * normalize_bound(p.lower[j]).max(-1e300)
                } else {
                    dj * normalize_bound(p.upper[j]).min(1e300)
                }
            })
            .sum();
        by + dx
    }

    pub fn duality_gap(&self, p: &LpProblem) -> f64 {
        (self.objective - self.dual_objective(p)).abs()
    }

    /// Largest `|y_i| * slack_i` over inequality rows and `|d_j| * distance to
    /// the bound matching the sign of d_j` over variables.
    pub fn complementary_slackness_residual(&self, p: &LpProblem) -> f64 {
        let mut worst: f64 = 0.0;
        let neq = p.eq_rows.len();
        for (k, (row, rhs)) in p.le_rows.iter().zip(&p.le_rhs).enumerate() {
            let slack = rhs - row.dot(&self.x);
            worst = worst.max(self.duals[neq + k].abs() * slack.abs());
        }
        let d = self.reduced_costs(p);
        for (j, dj) in d.iter().enumerate() {
            if dj.abs() <= 1e-12 {
                continue;
            }
            let bound = if *dj > 0.0 {
                normalize_bound(p.lower[j])
            } else {
                normalize_bound(p.upper[j])
            };
            let dist = if bound.is_finite() {
                (self.x[j] - bound).abs()
            } else {
                f64::INFINITY
            };
            worst = worst.max(dj.abs() * dist);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_row_merges_duplicates() {
        let r = SparseRow::from_terms(&[(3, 1.0), (1, 2.0), (3, -1.0), (2, 0.5)]);
        assert_eq!(r.idx, vec![1, 2]);
        assert_eq!(r.val, vec![2.0, 0.5]);
    }

    #[test]
    fn validate_catches_bad_bounds() {
        let mut p = LpProblem::new(2);
        p.set_bounds(1, 3.0, 1.0);
        assert!(matches!(p.validate(), Err(LpError::InvalidBounds { var: 1, .. })));
    }

    #[test]
    fn from_dense_checks_shapes() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let err = LpProblem::from_dense(
            vec![1.0, 1.0, 1.0],
            None,
            Some((&a, &[1.0])),
            vec![0.0; 3],
            vec![1.0; 3],
        );
        assert!(matches!(err, Err(LpError::DimensionMismatch(_))));
    }

    #[test]
    fn sentinel_bounds_are_infinite() {
        assert_eq!(normalize_bound(2e18), f64::INFINITY);
        assert_eq!(normalize_bound(-1e18), f64::NEG_INFINITY);
        assert_eq!(normalize_bound(5.0), 5.0);
    }
}
