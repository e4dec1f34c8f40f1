//! Vertex-enumeration oracle for small bounded LPs.
//!
//! Independent of the simplex path: every choice of `n - n_eq` active
//! inequalities (rows or finite variable bounds) is solved together with the
//! equality rows by dense LU, and the cheapest feasible vertex wins.

use super::dense::{lu_solve, DenseMatrix};
use super::problem::{normalize_bound, LpProblem};
use super::LpError;

#[derive(Clone, Debug, PartialEq)]
pub enum VertexOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    /// No basic feasible solution exists.
    Infeasible,
}

/// Refuses to enumerate more than this many active sets.
pub const MAX_ACTIVE_SETS: u64 = 5_000_000;

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Minimizes `p` by enumerating basic solutions. Every variable must have
/// finite bounds so that the feasible set is a polytope.
pub fn vertex_enumeration(p: &LpProblem, tol: f64) -> Result<VertexOutcome, LpError> {
    p.validate()?;
    let n = p.num_vars();
    let lo: Vec<f64> = p.lower.iter().map(|&v| normalize_bound(v)).collect();
    let hi: Vec<f64> = p.upper.iter().map(|&v| normalize_bound(v)).collect();
    if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
        return Err(LpError::DimensionMismatch(
            "vertex enumeration needs finite variable bounds".into(),
        ));
    }
    let neq = p.eq_rows.len();
    if neq > n {
        return Err(LpError::DimensionMismatch("more equalities than variables".into()));
    }
    let eq = p.eq_dense();
    let le = p.le_dense();

    // candidate active inequalities as (coefficients, rhs)
    let mut cands: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..le.rows() {
        cands.push((le.row(i).to_vec(), p.le_rhs[i]));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cands.push((e.clone(), lo[j]));
        cands.push((e, hi[j]));
    }
    let k = n - neq;
    if binomial(cands.len(), k) > MAX_ACTIVE_SETS {
        return Err(LpError::TooLarge(format!(
            "C({}, {k}) active sets exceed the enumeration budget",
            cands.len()
        )));
    }

    let feasible = |x: &[f64]| -> bool {
        (0..neq).all(|i| {
            let ax: f64 = eq.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
            (ax - p.eq_rhs[i]).abs() <= tol * (1.0 + p.eq_rhs[i].abs())
        }) && (0..le.rows()).all(|i| {
            let ax: f64 = le.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
            ax <= p.le_rhs[i] + tol * (1.0 + p.le_rhs[i].abs())
        }) && (0..n).all(|j| x[j] >= lo[j] - tol * (1.0 + lo[j].abs()) && x[j] <= hi[j] + tol * (1.0 + hi[j].abs()))
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut chosen: Vec<usize> = (0..k).collect();
    let total = cands.len();
    loop {
        let mut rows: Vec<f64> = Vec::with_capacity(n * n);
        let mut rhs: Vec<f64> = Vec::with_capacity(n);
        for i in 0..neq {
            rows.extend_from_slice(eq.row(i));
            rhs.push(p.eq_rhs[i]);
        }
        for &c in &chosen {
            rows.extend_from_slice(&cands[c].0);
            rhs.push(cands[c].1);
        }
        let a = DenseMatrix::from_row_major(n, n, rows)?;
        if let Ok(x) = lu_solve(&a, &rhs) {
            if feasible(&x) {
                let obj = p.objective_value(&x);
                if best.as_ref().is_none_or(|(_, b)| obj < *b) {
                    best = Some((x, obj));
                }
            }
        }
        // next combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(match best {
                    Some((x, objective)) => VertexOutcome::Optimal { x, objective },
                    None => VertexOutcome::Infeasible,
                });
            }
            i -= 1;
            if chosen[i] < total - k + i {
                chosen[i] += 1;
                for t in i + 1..k {
                    chosen[t] = chosen[t - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_box_corner() {
        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, -1.0];
        p.set_bounds(0, 0.0, 1.0);
        p.set_bounds(1, 0.0, 1.0);
        match vertex_enumeration(&p, 1e-9).unwrap() {
            VertexOutcome::Optimal { x, objective } => {
                assert_eq!(x, vec![0.0, 1.0]);
                assert_eq!(objective, -1.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_polytope() {
        let mut p = LpProblem::new(1);
        p.set_bounds(0, 0.0, 1.0);
        p.add_ge(&[(0, 1.0)], 2.0);
        assert_eq!(vertex_enumeration(&p, 1e-9).unwrap(), VertexOutcome::Infeasible);
    }

    #[test]
    fn binomial_counts() {
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(3, 5), 0);
    }
}
