use super::pwl::pwl_cost;
use super::{Mode, TsucError, TsucInstance, SURROGATE_TOL};
use crate::grid::{build_matrices, GridMatrices};
use crate::lp::LpProblem;

/// Row counts that distinguish the two modes.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConstraintCounts {
    /// `2 |L| |S| T` in full mode, 0 otherwise.
    pub flow_rows: usize,
    /// `|S| T` in surrogate mode, 0 otherwise.
    pub surrogate_rows: usize,
    pub total_rows: usize,
    pub variables: usize,
    pub binaries: usize,
}

/// Network-constraint counts of both modes for given sizes, without building
/// anything: `(full rows, surrogate rows, reduction %)`.
pub fn constraint_counts(lines: usize, scenarios: usize, horizon: usize) -> (usize, usize, f64) {
    let full = 2 * lines * scenarios * horizon;
    let surrogate = scenarios * horizon;
    let reduction = if full == 0 {
        0.0
    } else {
        100.0 * (1.0 - surrogate as f64 / full as f64)
    };
    (full, surrogate, reduction)
}

/// Column indices of each variable family.
#[derive(Clone, Debug)]
pub struct VarLayout {
    pub gens: usize,
    pub scenarios: usize,
    pub horizon: usize,
    pub segments: usize,
}

impl VarLayout {
    fn gt(&self) -> usize {
        self.gens * self.horizon
    }

    pub fn u(&self, g: usize, t: usize) -> usize {
        g * self.horizon + t
    }

    pub fn y(&self, g: usize, t: usize) -> usize {
        self.gt() + g * self.horizon + t
    }

    pub fn z(&self, g: usize, t: usize) -> usize {
        2 * self.gt() + g * self.horizon + t
    }

    pub fn p(&self, g: usize, s: usize, t: usize) -> usize {
        3 * self.gt() + (s * self.horizon + t) * self.gens + g
    }

    pub fn delta(&self, g: usize, s: usize, t: usize, k: usize) -> usize {
        let gst = self.gt() * self.scenarios;
        3 * self.gt() + gst + ((s * self.horizon + t) * self.gens + g) * self.segments + k
    }

    pub fn num_binaries(&self) -> usize {
        3 * self.gt()
    }

    pub fn num_vars(&self) -> usize {
        3 * self.gt() + self.gt() * self.scenarios * (1 + self.segments)
    }
}

/// The MILP: an LP over all variables plus the list of binary columns
/// (`u`, `y`, `z`, which occupy `0..3 G T`).
#[derive(Clone, Debug)]
pub struct TsucModel {
    pub lp: LpProblem,
    pub layout: VarLayout,
    pub counts: ConstraintCounts,
    pub matrices: GridMatrices,
}

pub fn build_milp(inst: &TsucInstance) -> Result<TsucModel, TsucError> {
    inst.validate()?;
    let case = &inst.case;
    let m = build_matrices(case)?;
    let (ng, ns, nt, nk) = (case.num_generators(), inst.scenarios.len(), inst.horizon, inst.pwl_segments);
    let lay = VarLayout { gens: ng, scenarios: ns, horizon: nt, segments: nk };
    let curves: Vec<_> = case.generators.iter().map(|g| pwl_cost(g, nk)).collect();

    let mut lp = LpProblem::new(lay.num_vars());
    for g in 0..ng {
        let gen = &case.generators[g];
        let base: f64 = inst.scenarios.iter().map(|s| s.probability * curves[g].base_cost).sum();
        for t in 0..nt {
            for v in [lay.u(g, t), lay.y(g, t), lay.z(g, t)] {
                lp.set_bounds(v, 0.0, 1.0);
            }
            lp.objective[lay.u(g, t)] = base;
            lp.objective[lay.y(g, t)] = gen.startup_cost;
            lp.objective[lay.z(g, t)] = gen.shutdown_cost;
            for (s, sc) in inst.scenarios.iter().enumerate() {
                lp.set_bounds(lay.p(g, s, t), 0.0, gen.p_max);
                for k in 0..nk {
                    let d = lay.delta(g, s, t, k);
                    lp.set_bounds(d, 0.0, curves[g].width(k));
                    lp.objective[d] = sc.probability * curves[g].slopes[k];
                }
            }
        }
    }

    // dispatch = p_min u + segments, segments only when committed
    for g in 0..ng {
        let gen = &case.generators[g];
        for s in 0..ns {
            for t in 0..nt {
                let mut link = vec![(lay.p(g, s, t), 1.0), (lay.u(g, t), -gen.p_min)];
                let mut cap = vec![(lay.u(g, t), -(gen.p_max - gen.p_min))];
                for k in 0..nk {
                    link.push((lay.delta(g, s, t, k), -1.0));
                    cap.push((lay.delta(g, s, t, k), 1.0));
                }
                lp.add_eq(&link, 0.0);
                lp.add_le(&cap, 0.0);
            }
        }
    }

    // system balance
    let mut net_fixed = vec![vec![Vec::new(); nt]; ns];
    for (s, sc) in inst.scenarios.iter().enumerate() {
        for t in 0..nt {
            let mut inj: Vec<f64> = sc.load_mw(case, t).iter().map(|l| -l).collect();
            for (w, unit) in case.wind_units.iter().enumerate() {
                inj[unit.bus] += sc.wind_mw[t][w];
            }
            let terms: Vec<(usize, f64)> = (0..ng).map(|g| (lay.p(g, s, t), 1.0)).collect();
            lp.add_eq(&terms, -inj.iter().sum::<f64>());
            net_fixed[s][t] = inj;
        }
    }

    // ramping between consecutive hours
    for g in 0..ng {
        let gen = &case.generators[g];
        for s in 0..ns {
            for t in 1..nt {
                let (now, prev) = (lay.p(g, s, t), lay.p(g, s, t - 1));
                lp.add_le(&[(now, 1.0), (prev, -1.0)], gen.ramp_up);
                lp.add_le(&[(prev, 1.0), (now, -1.0)], gen.ramp_down);
            }
        }
    }

    // startup/shutdown logic and minimum up/down windows
    for g in 0..ng {
        let gen = &case.generators[g];
        let u0 = if inst.initial_status[g] { 1.0 } else { 0.0 };
        for t in 0..nt {
            let (u, y, z) = (lay.u(g, t), lay.y(g, t), lay.z(g, t));
            if t == 0 {
                lp.add_le(&[(u, 1.0), (y, -1.0)], u0);
                lp.add_le(&[(u, -1.0), (z, -1.0)], -u0);
            } else {
                let up = lay.u(g, t - 1);
                lp.add_le(&[(u, 1.0), (up, -1.0), (y, -1.0)], 0.0);
                lp.add_le(&[(up, 1.0), (u, -1.0), (z, -1.0)], 0.0);
            }
            lp.add_le(&[(y, 1.0), (z, 1.0)], 1.0);
            for tau in t..(t + gen.min_up).min(nt) {
                lp.add_le(&[(y, 1.0), (lay.u(g, tau), -1.0)], 0.0);
            }
            for tau in t..(t + gen.min_down).min(nt) {
                lp.add_le(&[(z, 1.0), (lay.u(g, tau), 1.0)], 1.0);
            }
        }
    }

    let mut counts = ConstraintCounts {
        variables: lay.num_vars(),
        binaries: lay.num_binaries(),
        ..Default::default()
    };
    match &inst.mode {
        Mode::FullNetwork => {
            for s in 0..ns {
                for t in 0..nt {
                    let fixed = m.flows_from_injections(&net_fixed[s][t]);
                    for (l, line) in case.lines.iter().enumerate() {
                        let terms: Vec<(usize, f64)> = (0..ng)
                            .map(|g| (lay.p(g, s, t), m.ptdf[(l, case.generators[g].bus)]))
                            .collect();
                        lp.add_le(&terms, line.limit_mw - fixed[l]);
                        lp.add_ge(&terms, -line.limit_mw - fixed[l]);
                        counts.flow_rows += 2;
                    }
                }
            }
        }
        Mode::Surrogate(h) => {
            let nw = case.num_wind();
            let w = &h.weights_physical;
            for (s, sc) in inst.scenarios.iter().enumerate() {
                let wind_part: f64 = (0..nw)
                    .map(|k| w[k] * sc.wind.mu[k] + w[nw + k] * sc.wind.sigma[k])
                    .sum();
                for t in 0..nt {
                    let terms: Vec<(usize, f64)> = (0..ng).map(|g| (lay.p(g, s, t), w[2 * nw + g])).collect();
                    lp.add_ge(&terms, -h.bias_physical - wind_part - SURROGATE_TOL);
                    counts.surrogate_rows += 1;
                }
            }
        }
    }
    counts.total_rows = lp.num_rows();
    Ok(TsucModel { lp, layout: lay, counts, matrices: m })
}
