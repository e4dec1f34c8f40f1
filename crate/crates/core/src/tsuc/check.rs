use super::{build_feature_vector, Mode, Schedule, TsucInstance, TsucSolution, SURROGATE_TOL};
use crate::grid::{build_matrices, SystemCase};

const TOL_MW: f64 = 1e-6;

/// Startup/shutdown consistency and truncated minimum up/down windows.
pub fn schedule_is_valid(case: &SystemCase, sch: &Schedule, initial: &[bool]) -> Result<(), String> {
    for (g, gen) in case.generators.iter().enumerate() {
        let (u, y, z) = (&sch.u[g], &sch.y[g], &sch.z[g]);
        let nt = u.len();
        for t in 0..nt {
            let prev = if t == 0 { initial[g] } else { u[t - 1] };
            if u[t] && !prev && !y[t] {
                return Err(format!("unit {g} starts at hour {t} without a startup flag"));
            }
            if !u[t] && prev && !z[t] {
                return Err(format!("unit {g} stops at hour {t} without a shutdown flag"));
            }
            if y[t] && z[t] {
                return Err(format!("unit {g} starts and stops at hour {t}"));
            }
            if y[t] {
                if let Some(tau) = (t..(t + gen.min_up).min(nt)).find(|&k| !u[k]) {
                    return Err(format!("unit {g} started at hour {t} is off at {tau} (min up {})", gen.min_up));
                }
            }
            if z[t] {
                if let Some(tau) = (t..(t + gen.min_down).min(nt)).find(|&k| u[k]) {
                    return Err(format!("unit {g} stopped at hour {t} is on at {tau} (min down {})", gen.min_down));
                }
            }
        }
    }
    Ok(())
}

/// Every invariant a returned solution must satisfy: commitment logic,
/// dispatch limits, ramps, nodal balance, reference angle, and the line
/// limits or surrogate halfspace of the instance's mode.
pub fn check_solution(inst: &TsucInstance, sol: &TsucSolution) -> Result<(), String> {
    let case = &inst.case;
    schedule_is_valid(case, &sol.schedule, &inst.initial_status)?;
    let m = build_matrices(case).map_err(|e| e.to_string())?;
    for (s, sc) in inst.scenarios.iter().enumerate() {
        for t in 0..inst.horizon {
            let p = &sol.dispatch[s][t];
            for (g, gen) in case.generators.iter().enumerate() {
                let on = if sol.schedule.u[g][t] { 1.0 } else { 0.0 };
                if p[g] < gen.p_min * on - TOL_MW || p[g] > gen.p_max * on + TOL_MW {
                    return Err(format!("unit {g} scenario {s} hour {t}: dispatch {} outside limits", p[g]));
                }
                if t > 0 {
                    let dp = p[g] - sol.dispatch[s][t - 1][g];
                    if dp > gen.ramp_up + TOL_MW || -dp > gen.ramp_down + TOL_MW {
                        return Err(format!("unit {g} scenario {s} hour {t}: ramp {dp} exceeds limits"));
                    }
                }
            }
            let load = sc.load_mw(case, t);
            let inj = crate::dcopf::net_injections(case, p, &sc.wind_mw[t], &load);
            let theta = &sol.angles[s][t];
            if theta[case.ref_bus] != 0.0 {
                return Err(format!("scenario {s} hour {t}: reference angle {}", theta[case.ref_bus]));
            }
            let resid = m.balance_residual(theta, &inj);
            if resid > TOL_MW {
                return Err(format!("scenario {s} hour {t}: nodal balance residual {resid} MW"));
            }
            match &inst.mode {
                Mode::FullNetwork => {
                    for (l, f) in m.flows_from_angles(theta).iter().enumerate() {
                        if f.abs() > case.lines[l].limit_mw + TOL_MW {
                            return Err(format!("scenario {s} hour {t}: line {l} flow {f} over limit"));
                        }
                    }
                }
                Mode::Surrogate(h) => {
                    let phi = build_feature_vector(sc, p, &h.feature_names).map_err(|e| e.to_string())?;
                    let v = h.decision(&phi);
                    // the LP holds rows to round-off relative to their magnitude
                    let scale = 1.0
                        + h.bias_physical.abs()
                        + h.weights_physical.iter().zip(&phi).map(|(w, x)| (w * x).abs()).sum::<f64>();
                    if v < -SURROGATE_TOL * scale {
                        return Err(format!("scenario {s} hour {t}: surrogate value {v}"));
                    }
                }
            }
        }
    }
    Ok(())
}
