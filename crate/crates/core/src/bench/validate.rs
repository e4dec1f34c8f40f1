use rand::Rng;

use super::CliError;
use crate::grid::{build_matrices, SystemCase};
use crate::lp::{solve_lp, vertex_enumeration, LpProblem, VertexOutcome};
use crate::scenario::{build_scenarios, substream};
use crate::tsuc::{brute_force_tsuc, check_solution, solve_tsuc, Mode, SolveOptions, TsucError, TsucInstance};

pub const SUITES: [&str; 4] = ["lp", "ptdf", "brute", "monotonic"];

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub fn run_suite(name: &str, case: &SystemCase, seed: u64) -> Result<SuiteOutcome, CliError> {
    let (name, result) = match name {
        "lp" => ("lp", lp_suite(seed)),
        "ptdf" => ("ptdf", ptdf_suite(case, seed)),
        "brute" => ("brute", brute_suite(case, seed)),
        "monotonic" => ("monotonic", monotonic_suite(case, seed)),
        other => {
            return Err(CliError::Input(format!(
                "unknown suite '{other}' (expected one of {})",
                SUITES.join(", ")
            )))
        }
    };
    let (passed, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Ok(SuiteOutcome { name, passed, detail })
}

fn random_lp<R: Rng>(rng: &mut R) -> LpProblem {
    let n = 5;
    let mut p = LpProblem::new(n);
    for j in 0..n {
        p.objective[j] = rng.random_range(-10.0..10.0);
        let lo = rng.random_range(-5.0..0.0);
        p.set_bounds(j, lo, lo + rng.random_range(1.0..8.0));
    }
    let x0: Vec<f64> = (0..n).map(|j| rng.random_range(p.lower[j]..p.upper[j])).collect();
    let n_eq = rng.random_range(0..2);
    for i in 0..4 {
        let terms: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.random_range(-4.0..4.0))).collect();
        let ax: f64 = terms.iter().map(|&(j, a)| a * x0[j]).sum();
        if i < n_eq {
            p.add_eq(&terms, ax);
        } else {
            p.add_le(&terms, ax + rng.random_range(0.0..3.0));
        }
    }
    p
}

/// Simplex against vertex enumeration on random feasible LPs.
fn lp_suite(seed: u64) -> Result<String, String> {
    for k in 0..100 {
        let p = random_lp(&mut substream(seed, 900, k));
        let s = solve_lp(&p).map_err(|e| format!("lp {k}: {e}"))?;
        let VertexOutcome::Optimal { objective, .. } = vertex_enumeration(&p, 1e-9).map_err(|e| e.to_string())? else {
            return Err(format!("lp {k}: oracle found no vertex"));
        };
        if !s.is_optimal() || (s.objective - objective).abs() > 1e-8 * (1.0 + objective.abs()) {
            return Err(format!("lp {k}: simplex {:?} {} vs oracle {objective}", s.status, s.objective));
        }
        if s.duality_gap(&p) > 1e-6 * (1.0 + s.objective.abs()) {
            return Err(format!("lp {k}: duality gap {}", s.duality_gap(&p)));
        }
    }
    Ok("100 random LPs match vertex enumeration".into())
}

/// PTDF flows against angle-solve flows on random balanced injections.
fn ptdf_suite(case: &SystemCase, seed: u64) -> Result<String, String> {
    let m = build_matrices(case).map_err(|e| e.to_string())?;
    let nb = case.num_buses();
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let mut rng = substream(seed, 901, k);
        let mut inj: Vec<f64> = (0..nb).map(|_| rng.random_range(-100.0..100.0)).collect();
        let total: f64 = inj.iter().sum();
        inj[case.ref_bus] -= total;
        let theta = m.angles(&inj);
        let a = m.flows_from_angles(&theta);
        let p = m.flows_from_injections(&inj);
        let diff = a.iter().zip(&p).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst = worst.max(diff);
        if diff > 1e-8 {
            return Err(format!("draw {k}: PTDF and angle flows differ by {diff:e} MW"));
        }
        let resid = m.balance_residual(&theta, &inj);
        if resid > 1e-6 {
            return Err(format!("draw {k}: nodal balance residual {resid:e} MW"));
        }
    }
    Ok(format!("1000 injections, worst flow difference {worst:.1e} MW"))
}

fn small_horizon(case: &SystemCase) -> Option<usize> {
    let g = case.num_generators();
    (g > 0 && g <= 12).then(|| (12 / g).min(4))
}

/// Branch-and-bound against enumeration on small instances of this case.
fn brute_suite(case: &SystemCase, seed: u64) -> Result<String, String> {
    let Some(t) = small_horizon(case) else {
        return Ok(format!("skipped: {} units exceed the enumeration budget", case.num_generators()));
    };
    let mut solved = 0;
    for k in 0..5 {
        let sc = build_scenarios(case, 2, t, seed + k).map_err(|e| e.to_string())?;
        let inst = TsucInstance::new(case.clone(), sc, t, Mode::FullNetwork);
        match (solve_tsuc(&inst, &SolveOptions::default()), brute_force_tsuc(&inst)) {
            (Ok(s), Ok(b)) => {
                check_solution(&inst, &s).map_err(|e| format!("instance {k}: {e}"))?;
                if (s.objective - b.objective).abs() > 1e-6 * b.objective.abs().max(1.0) {
                    return Err(format!("instance {k}: search {} vs enumeration {}", s.objective, b.objective));
                }
                solved += 1;
            }
            (Err(TsucError::Infeasible), Err(TsucError::Infeasible)) => {}
            (s, b) => {
                return Err(format!(
                    "instance {k}: search {:?} vs enumeration {:?}",
                    s.map(|x| x.objective),
                    b.map(|x| x.objective)
                ))
            }
        }
    }
    Ok(format!("{solved} feasible instances agree (T={t})"))
}

/// Halving every line limit may not lower the full-network optimum. The
/// untightened case must itself be solvable.
fn monotonic_suite(case: &SystemCase, seed: u64) -> Result<String, String> {
    let t = small_horizon(case).unwrap_or(1).min(4);
    let sc = build_scenarios(case, 2, t, seed).map_err(|e| e.to_string())?;
    let opts = SolveOptions::default();
    let base = solve_tsuc(&TsucInstance::new(case.clone(), sc.clone(), t, Mode::FullNetwork), &opts)
        .map_err(|e| format!("base case: {e}"))?;
    let mut tight = case.clone();
    for l in &mut tight.lines {
        l.limit_mw *= 0.5;
    }
    match solve_tsuc(&TsucInstance::new(tight, sc, t, Mode::FullNetwork), &opts) {
        Ok(s) if s.objective < base.objective * (1.0 - opts.gap_tol) - 1e-9 => Err(format!(
            "halved limits lowered the optimum: {} < {}",
            s.objective, base.objective
        )),
        Ok(s) => Ok(format!("{:.4} -> {:.4} with halved limits", base.objective, s.objective)),
        Err(TsucError::Infeasible) => Ok(format!("{:.4} -> infeasible with halved limits", base.objective)),
        Err(e) => Err(format!("halved limits: {e}")),
    }
}
