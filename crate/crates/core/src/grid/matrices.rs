use crate::lp::dense::{DenseLu, DenseMatrix};

use super::{GridError, SystemCase};

/// Susceptance matrix, its reduced form and the PTDF of a case.
///
/// `b_matrix` is in per-unit susceptance (1/x). Angle solves take MW
/// injections, divide by `base_mva`, and return radians; PTDF entries are
/// dimensionless so `ptdf * injection_mw` gives MW flows directly.
#[derive(Clone, Debug)]
pub struct GridMatrices {
    pub b_matrix: DenseMatrix,
    pub reduced_b: DenseMatrix,
    pub ptdf: DenseMatrix,
    ref_bus: usize,
    base_mva: f64,
    lines: Vec<(usize, usize, f64)>,
    reduced_lu: DenseLu,
}

pub fn build_matrices(case: &SystemCase) -> Result<GridMatrices, GridError> {
    let nb = case.num_buses();
    let mut b = DenseMatrix::zeros(nb, nb);
    for l in &case.lines {
        let s = 1.0 / l.x_pu;
        b[(l.from, l.from)] += s;
        b[(l.to, l.to)] += s;
        b[(l.from, l.to)] -= s;
        b[(l.to, l.from)] -= s;
    }
    let reduced = b.without_row_col(case.ref_bus, case.ref_bus);
    let reduced_lu = DenseLu::factor(&reduced).map_err(|_| GridError::SingularMatrix)?;

    // column k of X = reduced_b^{-1}, expanded with a zero at the reference
    let mut x_full = DenseMatrix::zeros(nb, nb);
    for k in 0..nb {
        if k == case.ref_bus {
            continue;
        }
        let mut e = vec![0.0; nb - 1];
        e[reduce_index(k, case.ref_bus)] = 1.0;
        let col = reduced_lu.solve(&e).map_err(|_| GridError::SingularMatrix)?;
        for i in 0..nb {
            if i != case.ref_bus {
                x_full[(i, k)] = col[reduce_index(i, case.ref_bus)];
            }
        }
    }
    let mut ptdf = DenseMatrix::zeros(case.num_lines(), nb);
    for (li, l) in case.lines.iter().enumerate() {
        for k in 0..nb {
            ptdf[(li, k)] = (x_full[(l.from, k)] - x_full[(l.to, k)]) / l.x_pu;
        }
    }
    Ok(GridMatrices {
        b_matrix: b,
        reduced_b: reduced,
        ptdf,
        ref_bus: case.ref_bus,
        base_mva: case.base_mva,
        lines: case.lines.iter().map(|l| (l.from, l.to, l.x_pu)).collect(),
        reduced_lu,
    })
}

fn reduce_index(i: usize, r: usize) -> usize {
    if i < r {
        i
    } else {
        i - 1
    }
}

impl GridMatrices {
    pub fn num_buses(&self) -> usize {
        self.b_matrix.rows()
    }

    /// Voltage angles (rad) for net injections in MW; `theta[ref] = 0`.
    /// The reference bus absorbs any imbalance.
    pub fn angles(&self, injection_mw: &[f64]) -> Vec<f64> {
        let nb = self.num_buses();
        let rhs: Vec<f64> = (0..nb)
            .filter(|&i| i != self.ref_bus)
            .map(|i| injection_mw[i] / self.base_mva)
            .collect();
        let red = self.reduced_lu.solve(&rhs).expect("dimensions fixed at construction");
        (0..nb)
            .map(|i| {
                if i == self.ref_bus {
                    0.0
                } else {
                    red[reduce_index(i, self.ref_bus)]
                }
            })
            .collect()
    }

    /// Line flows in MW from angles, `base (theta_from - theta_to) / x`.
    pub fn flows_from_angles(&self, theta: &[f64]) -> Vec<f64> {
        self.lines
            .iter()
            .map(|&(f, t, x)| self.base_mva * (theta[f] - theta[t]) / x)
            .collect()
    }

    /// Line flows in MW as `PTDF * injection`.
    pub fn flows_from_injections(&self, injection_mw: &[f64]) -> Vec<f64> {
        self.ptdf.mul_vec(injection_mw)
    }

    /// Largest `|B theta base - injection|` over buses, in MW.
    pub fn balance_residual(&self, theta: &[f64], injection_mw: &[f64]) -> f64 {
        self.b_matrix
            .mul_vec(theta)
            .iter()
            .zip(injection_mw)
            .map(|(bt, p)| (bt * self.base_mva - p).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{fixtures, parse_case};

    #[test]
    fn two_bus_b_matrix() {
        let text = "[config]\nref_bus = 1\n[buses]\n1, 0\n2, 10\n[lines]\n1, 2, 0.1, 50\n";
        let m = build_matrices(&parse_case(text).unwrap()).unwrap();
        let expect = [[10.0, -10.0], [-10.0, 10.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.b_matrix[(i, j)] - expect[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn three_bus_ring_ptdf_split() {
        let case = parse_case(fixtures::THREE_BUS).unwrap();
        let m = build_matrices(&case).unwrap();
        // +1 at bus 1, -1 at bus 3: direct line 1-3 carries 2/3, the path
        // 1-2-3 carries 1/3 (hand solve of the reduced 2x2 system)
        let f = m.flows_from_injections(&[1.0, 0.0, -1.0]);
        let direct = case.lines.iter().position(|l| (l.from, l.to) == (0, 2)).unwrap();
        let via12 = case.lines.iter().position(|l| (l.from, l.to) == (0, 1)).unwrap();
        let via23 = case.lines.iter().position(|l| (l.from, l.to) == (1, 2)).unwrap();
        assert!((f[direct] - 2.0 / 3.0).abs() < 1e-12);
        assert!((f[via12] - 1.0 / 3.0).abs() < 1e-12);
        assert!((f[via23] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn symmetry_zero_row_sums_and_reference_column() {
        for (name, text) in fixtures::ALL {
            let case = parse_case(text).unwrap();
            let m = build_matrices(&case).unwrap();
            let nb = case.num_buses();
            for i in 0..nb {
                let mut sum = 0.0;
                for j in 0..nb {
                    assert!((m.b_matrix[(i, j)] - m.b_matrix[(j, i)]).abs() <= 1e-9, "{name}");
                    sum += m.b_matrix[(i, j)];
                }
                assert!(sum.abs() <= 1e-9, "{name}: row {i} sums to {sum}");
            }
            for l in 0..case.num_lines() {
                assert_eq!(m.ptdf[(l, case.ref_bus)], 0.0, "{name}");
            }
        }
    }

    #[test]
    fn parallel_lines_accumulate_susceptance() {
        let text = "[config]\nref_bus = 1\n[buses]\n1, 0\n2, 10\n[lines]\n1, 2, 0.1, 50\n1, 2, 0.2, 50\n";
        let m = build_matrices(&parse_case(text).unwrap()).unwrap();
        assert!((m.b_matrix[(0, 1)] + 15.0).abs() < 1e-12);
        let f = m.flows_from_injections(&[1.0, -1.0]);
        assert!((f[0] - 2.0 / 3.0).abs() < 1e-12 && (f[1] - 1.0 / 3.0).abs() < 1e-12);
    }
}
