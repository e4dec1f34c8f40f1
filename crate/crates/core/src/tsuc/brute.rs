use std::time::Instant;

use rayon::prelude::*;

use super::bnb::{extract_solution, fixed_bounds};
use super::model::build_milp;
use super::{schedule_is_valid, Schedule, SolveStats, TsucError, TsucInstance, TsucSolution};
use crate::lp::{SimplexEngine, SimplexOptions};

/// Largest `G T` accepted by [`brute_force_tsuc`].
pub const BRUTE_FORCE_MAX_BINARIES: usize = 16;

/// Exact optimum by enumerating every commitment `u`, taking the implied
/// startups/shutdowns, discarding schedules that break minimum up/down
/// windows or cannot meet net load, and LP-dispatching the rest.
pub fn brute_force_tsuc(inst: &TsucInstance) -> Result<TsucSolution, TsucError> {
    let ng = inst.case.num_generators();
    let nt = inst.horizon;
    if ng * nt > BRUTE_FORCE_MAX_BINARIES {
        return Err(TsucError::TooLarge {
            binaries: ng * nt,
            limit: BRUTE_FORCE_MAX_BINARIES,
        });
    }
    let model = build_milp(inst)?;
    let start = Instant::now();
    let engine = SimplexEngine::new(&model.lp)?;
    let opts = SimplexOptions::default();
    let net: Vec<Vec<f64>> = inst
        .scenarios
        .iter()
        .map(|sc| {
            (0..nt)
                .map(|t| sc.load_mw(&inst.case, t).iter().sum::<f64>() - sc.wind_mw[t].iter().sum::<f64>())
                .collect()
        })
        .collect();

    let results: Vec<(u64, f64, Vec<f64>)> = (0..1u64 << (ng * nt))
        .into_par_iter()
        .filter_map(|mask| {
            let u: Vec<Vec<bool>> = (0..ng)
                .map(|g| (0..nt).map(|t| mask >> (g * nt + t) & 1 == 1).collect())
                .collect();
            for t in 0..nt {
                let (lo, hi) = inst.case.generators.iter().enumerate().filter(|(g, _)| u[*g][t]).fold(
                    (0.0, 0.0),
                    |(lo, hi), (_, gen)| (lo + gen.p_min, hi + gen.p_max),
                );
                if net.iter().any(|n| n[t] > hi + 1e-9 || n[t] < lo - 1e-9) {
                    return None;
                }
            }
            let sch = Schedule::from_commitment(u, &inst.initial_status);
            schedule_is_valid(&inst.case, &sch, &inst.initial_status).ok()?;
            let (lo, hi) = fixed_bounds(&model, &sch);
            let sol = engine.solve(&lo, &hi, None, &opts);
            sol.is_optimal().then_some((mask, sol.objective, sol.x))
        })
        .collect();
    let lp_solves = results.len();
    let (_, objective, x) = results
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or(TsucError::Infeasible)?;
    let stats = SolveStats {
        lp_solves,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        root_bound: objective,
        ..Default::default()
    };
    Ok(extract_solution(inst, &model, &x, objective, stats))
}
