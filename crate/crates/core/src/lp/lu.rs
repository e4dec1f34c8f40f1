//! Sparse LU factorization of simplex bases with product-form updates.
//!
//! Pivots are chosen singletons first (slack columns cost nothing), then by a
//! Markowitz count with threshold partial pivoting on the remaining bump.

const DROP_TOL: f64 = 1e-14;
const MARKOWITZ_THRESHOLD: f64 = 0.1;
const ROW_SINGLETON_THRESHOLD: f64 = 0.01;

/// Columns of the matrix handed to [`SparseLu::factor`]; entry `k` is column `k`.
pub(crate) struct ColumnSet<'a> {
    pub idx: Vec<&'a [usize]>,
    pub val: Vec<&'a [f64]>,
}

#[derive(Debug)]
pub(crate) struct Singular {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct SparseLu {
    m: usize,
    pivot_row: Vec<usize>,
    pivot_col: Vec<usize>,
    diag: Vec<f64>,
    l_start: Vec<usize>,
    l_row: Vec<usize>,
    l_val: Vec<f64>,
    u_start: Vec<usize>,
    u_col: Vec<usize>,
    u_val: Vec<f64>,
}

impl SparseLu {
    pub fn factor(m: usize, cols: &ColumnSet<'_>, pivot_tol: f64) -> Result<Self, Singular> {
        assert_eq!(cols.idx.len(), m);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut col_count = vec![0usize; m];
        for c in 0..m {
            for (&r, &v) in cols.idx[c].iter().zip(cols.val[c]) {
                if v != 0.0 {
                    rows[r].push((c, v));
                    col_rows[c].push(r);
                    col_count[c] += 1;
                }
            }
        }
        let mut row_active = vec![true; m];
        let mut col_active = vec![true; m];
        let mut col_singletons: Vec<usize> = (0..m).filter(|&c| col_count[c] == 1).rev().collect();
        let mut row_singletons: Vec<usize> = (0..m).filter(|&r| rows[r].len() == 1).rev().collect();
        let mut active_cols: Vec<usize> = (0..m).collect();
        let mut work = vec![usize::MAX; m];

        let mut lu = SparseLu {
            m,
            l_start: vec![0],
            u_start: vec![0],
            ..Default::default()
        };

        let entry = |rows: &Vec<Vec<(usize, f64)>>, r: usize, c: usize| -> Option<f64> {
            rows[r].iter().find(|e| e.0 == c).map(|e| e.1)
        };

        for _ in 0..m {
            let mut choice: Option<(usize, usize, f64)> = None;

            while let Some(c) = col_singletons.pop() {
                if !col_active[c] || col_count[c] != 1 {
                    continue;
                }
                let r = col_rows[c]
                    .iter()
                    .copied()
                    .find(|&r| row_active[r] && entry(&rows, r, c).is_some());
                if let Some(r) = r {
                    let v = entry(&rows, r, c).unwrap();
                    if v.abs() > pivot_tol {
                        choice = Some((r, c, v));
                        break;
                    }
                }
            }

            if choice.is_none() {
                while let Some(r) = row_singletons.pop() {
                    if !row_active[r] || rows[r].len() != 1 {
                        continue;
                    }
                    let (c, v) = rows[r][0];
                    let col_max = col_rows[c]
                        .iter()
                        .filter(|&&i| row_active[i])
                        .filter_map(|&i| entry(&rows, i, c))
                        .fold(0.0f64, |a, b| a.max(b.abs()));
                    if v.abs() > pivot_tol && v.abs() >= ROW_SINGLETON_THRESHOLD * col_max {
                        choice = Some((r, c, v));
                        break;
                    }
                }
            }

            if choice.is_none() {
                active_cols.retain(|&c| col_active[c]);
                let mut best: Option<(usize, usize, usize, f64)> = None; // (cost, r, c, v)
                let mut min_count = usize::MAX;
                for &c in &active_cols {
                    if col_count[c] > 0 {
                        min_count = min_count.min(col_count[c]);
                    }
                }
                let mut examined = 0;
                for &c in &active_cols {
                    let cnt = col_count[c];
                    if cnt == 0 || cnt > min_count + 1 {
                        continue;
                    }
                    let entries: Vec<(usize, f64)> = col_rows[c]
                        .iter()
                        .filter(|&&i| row_active[i])
                        .filter_map(|&i| entry(&rows, i, c).map(|v| (i, v)))
                        .collect();
                    let col_max = entries.iter().fold(0.0f64, |a, e| a.max(e.1.abs()));
                    if col_max <= pivot_tol {
                        continue;
                    }
                    for &(i, v) in &entries {
                        if v.abs() < MARKOWITZ_THRESHOLD * col_max {
                            continue;
                        }
                        let cost = (rows[i].len() - 1) * (cnt - 1);
                        let better = match best {
                            None => true,
                            Some((bc, _, _, bv)) => cost < bc || (cost == bc && v.abs() > bv.abs()),
                        };
                        if better {
                            best = Some((cost, i, c, v));
                        }
                    }
                    examined += 1;
                    if examined >= 8 {
                        break;
                    }
                }
                choice = best.map(|(_, r, c, v)| (r, c, v));
            }

            let Some((r, c, piv)) = choice else {
                return Err(Singular {
                    rows: (0..m).filter(|&i| row_active[i]).collect(),
                    cols: (0..m).filter(|&j| col_active[j]).collect(),
                });
            };

            row_active[r] = false;
            col_active[c] = false;
            let urow: Vec<(usize, f64)> = rows[r].iter().copied().filter(|e| e.0 != c).collect();
            for &(j, _) in &urow {
                col_count[j] -= 1;
                if col_count[j] == 1 {
                    col_singletons.push(j);
                }
            }
            col_count[c] = 0;

            let targets: Vec<usize> = col_rows[c].clone();
            for i in targets {
                if !row_active[i] {
                    continue;
                }
                let Some(pos) = rows[i].iter().position(|e| e.0 == c) else {
                    continue;
                };
                let l = rows[i][pos].1 / piv;
                rows[i].swap_remove(pos);
                lu.l_row.push(i);
                lu.l_val.push(l);
                if !urow.is_empty() {
                    for (p, e) in rows[i].iter().enumerate() {
                        work[e.0] = p;
                    }
                    for &(j, u) in &urow {
                        let w = work[j];
                        if w != usize::MAX {
                            rows[i][w].1 -= l * u;
                        } else {
                            rows[i].push((j, -l * u));
                            col_rows[j].push(i);
                            col_count[j] += 1;
                        }
                    }
                    for e in rows[i].iter() {
                        work[e.0] = usize::MAX;
                    }
                    let before = rows[i].len();
                    let mut dropped: Vec<usize> = Vec::new();
                    rows[i].retain(|e| {
                        let keep = e.1.abs() > DROP_TOL;
                        if !keep {
                            dropped.push(e.0);
                        }
                        keep
                    });
                    if rows[i].len() != before {
                        for j in dropped {
                            col_count[j] -= 1;
                            if col_count[j] == 1 {
                                col_singletons.push(j);
                            }
                        }
                    }
                }
                if rows[i].len() == 1 {
                    row_singletons.push(i);
                }
            }

            lu.pivot_row.push(r);
            lu.pivot_col.push(c);
            lu.diag.push(piv);
            lu.l_start.push(lu.l_row.len());
            for (j, u) in urow {
                lu.u_col.push(j);
                lu.u_val.push(u);
            }
            lu.u_start.push(lu.u_col.len());
        }
        Ok(lu)
    }

    /// Solves `B x = a` in place: `a` is indexed by row on entry and by column
    /// on exit.
    pub fn solve(&self, a: &mut [f64], scratch: &mut Vec<f64>) {
        let m = self.m;
        for k in 0..m {
            let v = a[self.pivot_row[k]];
            if v != 0.0 {
                for p in self.l_start[k]..self.l_start[k + 1] {
                    a[self.l_row[p]] -= self.l_val[p] * v;
                }
            }
        }
        scratch.clear();
        scratch.resize(m, 0.0);
        for k in (0..m).rev() {
            let mut s = a[self.pivot_row[k]];
            for p in self.u_start[k]..self.u_start[k + 1] {
                s -= self.u_val[p] * scratch[self.u_col[p]];
            }
            scratch[self.pivot_col[k]] = s / self.diag[k];
        }
        a.copy_from_slice(scratch);
    }

    /// Solves `B^T y = c` in place: `c` is indexed by column on entry and by
    /// row on exit.
    pub fn solve_transpose(&self, c: &mut [f64], scratch: &mut Vec<f64>) {
        let m = self.m;
        scratch.clear();
        scratch.resize(m, 0.0);
        for k in 0..m {
            let v = c[self.pivot_col[k]] / self.diag[k];
            scratch[self.pivot_row[k]] = v;
            if v != 0.0 {
                for p in self.u_start[k]..self.u_start[k + 1] {
                    c[self.u_col[p]] -= self.u_val[p] * v;
                }
            }
        }
        for k in (0..m).rev() {
            let mut s = 0.0;
            for p in self.l_start[k]..self.l_start[k + 1] {
                s += self.l_val[p] * scratch[self.l_row[p]];
            }
            scratch[self.pivot_row[k]] -= s;
        }
        c.copy_from_slice(scratch);
    }

    pub fn nnz(&self) -> usize {
        self.l_row.len() + self.u_col.len() + self.m
    }
}

#[derive(Clone, Debug)]
struct Eta {
    pos: usize,
    pivot: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

/// `B^{-1}` as a sparse LU of a reference basis followed by eta updates.
#[derive(Clone, Debug, Default)]
pub(crate) struct BasisFactor {
    lu: SparseLu,
    etas: Vec<Eta>,
    eta_nnz: usize,
    scratch: Vec<f64>,
}

impl BasisFactor {
    pub fn new(lu: SparseLu) -> Self {
        Self {
            lu,
            ..Default::default()
        }
    }

    pub fn num_updates(&self) -> usize {
        self.etas.len()
    }

    /// True when the eta file has grown past the size of the factors.
    pub fn is_bloated(&self) -> bool {
        self.eta_nnz > 2 * self.lu.nnz() + 10 * self.lu.m
    }

    /// `a` (by row) becomes `B^{-1} a` (by basis position).
    pub fn ftran(&mut self, a: &mut [f64]) {
        self.lu.solve(a, &mut self.scratch);
        for eta in &self.etas {
            let xr = a[eta.pos] / eta.pivot;
            if xr != 0.0 {
                for (&i, &v) in eta.idx.iter().zip(&eta.val) {
                    a[i] -= v * xr;
                }
            }
            a[eta.pos] = xr;
        }
    }

    /// `c` (by basis position) becomes `B^{-T} c` (by row).
    pub fn btran(&mut self, c: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.pos];
            for (&i, &v) in eta.idx.iter().zip(&eta.val) {
                s -= c[i] * v;
            }
            c[eta.pos] = s / eta.pivot;
        }
        self.lu.solve_transpose(c, &mut self.scratch);
    }

    /// Records the replacement of the column at basis position `pos`, where
    /// `alpha` is the entering column after [`Self::ftran`].
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (i, &v) in alpha.iter().enumerate() {
            if i != pos && v.abs() > DROP_TOL {
                idx.push(i);
                val.push(v);
            }
        }
        self.eta_nnz += idx.len() + 1;
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            idx,
            val,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::dense::{lu_solve, DenseMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn to_columns(a: &DenseMatrix) -> (Vec<Vec<usize>>, Vec<Vec<f64>>) {
        let mut idx = vec![Vec::new(); a.cols()];
        let mut val = vec![Vec::new(); a.cols()];
        for j in 0..a.cols() {
            for i in 0..a.rows() {
                if a[(i, j)] != 0.0 {
                    idx[j].push(i);
                    val[j].push(a[(i, j)]);
                }
            }
        }
        (idx, val)
    }

    fn factor(a: &DenseMatrix) -> Result<SparseLu, Singular> {
        let (idx, val) = to_columns(a);
        let cols = ColumnSet {
            idx: idx.iter().map(|v| v.as_slice()).collect(),
            val: val.iter().map(|v| v.as_slice()).collect(),
        };
        SparseLu::factor(a.rows(), &cols, 1e-12)
    }

    fn random_sparse(rng: &mut ChaCha8Rng, n: usize, density: f64) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if rng.random::<f64>() < density {
                    a[(i, j)] = rng.random_range(-1.0..1.0);
                }
            }
            a[(i, i)] += if rng.random::<bool>() { 3.0 } else { -3.0 };
        }
        // scramble columns so the diagonal is not where the pivots sit
        let perm: Vec<usize> = {
            let mut p: Vec<usize> = (0..n).collect();
            for k in (1..n).rev() {
                p.swap(k, rng.random_range(0..=k));
            }
            p
        };
        let mut b = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                b[(i, perm[j])] = a[(i, j)];
            }
        }
        b
    }

    #[test]
    fn solves_match_dense_lu() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40 {
            let n = 1 + trial % 25;
            let a = random_sparse(&mut rng, n, 0.15);
            let lu = factor(&a).expect("nonsingular");
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let mut x = b.clone();
            let mut scratch = Vec::new();
            lu.solve(&mut x, &mut scratch);
            let dense = lu_solve(&a, &b).unwrap();
            for (u, v) in x.iter().zip(&dense) {
                assert!((u - v).abs() < 1e-9, "ftran mismatch");
            }
            let mut y = b.clone();
            lu.solve_transpose(&mut y, &mut scratch);
            let dense_t = lu_solve(&a.transpose(), &b).unwrap();
            for (u, v) in y.iter().zip(&dense_t) {
                assert!((u - v).abs() < 1e-9, "btran mismatch");
            }
        }
    }

    #[test]
    fn eta_updates_track_column_replacement() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 12;
        let mut a = random_sparse(&mut rng, n, 0.2);
        let mut bf = BasisFactor::new(factor(&a).unwrap());
        for step in 0..8 {
            let pos = (step * 5) % n;
            let newcol: Vec<f64> = (0..n)
                .map(|i| if i == pos { 4.0 } else if rng.random::<f64>() < 0.3 { rng.random_range(-1.0..1.0) } else { 0.0 })
                .collect();
            let mut alpha = newcol.clone();
            bf.ftran(&mut alpha);
            bf.update(pos, &alpha);
            for i in 0..n {
                a[(i, pos)] = newcol[i];
            }
            let b: Vec<f64> = (0..n).map(|i| (i as f64) - 3.0).collect();
            let mut x = b.clone();
            bf.ftran(&mut x);
            let dense = lu_solve(&a, &b).unwrap();
            for (u, v) in x.iter().zip(&dense) {
                assert!((u - v).abs() < 1e-8);
            }
            let mut y = b.clone();
            bf.btran(&mut y);
            let dense_t = lu_solve(&a.transpose(), &b).unwrap();
            for (u, v) in y.iter().zip(&dense_t) {
                assert!((u - v).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn singular_reports_unpivoted() {
        let a = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 2.0],
            vec![0.0, 2.0, 4.0],
        ])
        .unwrap();
        let err = factor(&a).unwrap_err();
        assert_eq!(err.rows.len(), 1);
        assert_eq!(err.cols.len(), 1);
    }
}
