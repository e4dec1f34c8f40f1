use std::fmt::Write as _;

use super::TsucSolution;

/// CSV report: a `key,value` summary block, then per-(unit, hour)
/// commitment, then per-(unit, scenario, hour) dispatch. Blocks are
/// separated by blank lines; units, scenarios and hours count from 1.
pub fn solution_report(sol: &TsucSolution) -> String {
    let mut out = String::new();
    let c = &sol.counts;
    let st = &sol.stats;
    writeln!(out, "key,value").unwrap();
    writeln!(out, "mode,{}", sol.mode).unwrap();
    writeln!(out, "objective,{:.10e}", sol.objective).unwrap();
    writeln!(out, "gap,{:.6e}", st.gap).unwrap();
    writeln!(out, "nodes,{}", st.nodes).unwrap();
    writeln!(out, "lp_solves,{}", st.lp_solves).unwrap();
    writeln!(out, "wall_time_ms,{:.3}", st.wall_time_ms).unwrap();
    writeln!(out, "node_limit_hit,{}", st.node_limit_hit).unwrap();
    writeln!(out, "flow_rows,{}", c.flow_rows).unwrap();
    writeln!(out, "surrogate_rows,{}", c.surrogate_rows).unwrap();
    writeln!(out, "total_rows,{}", c.total_rows).unwrap();
    writeln!(out, "variables,{}", c.variables).unwrap();
    writeln!(out, "binaries,{}", c.binaries).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "gen,hour,u,y,z").unwrap();
    let sch = &sol.schedule;
    for g in 0..sch.u.len() {
        for t in 0..sch.u[g].len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                g + 1,
                t + 1,
                u8::from(sch.u[g][t]),
                u8::from(sch.y[g][t]),
                u8::from(sch.z[g][t])
            )
            .unwrap();
        }
    }
    writeln!(out).unwrap();
    writeln!(out, "gen,scenario,hour,p_mw").unwrap();
    let ng = sch.u.len();
    for g in 0..ng {
        for (s, ds) in sol.dispatch.iter().enumerate() {
            for (t, p) in ds.iter().enumerate() {
                writeln!(out, "{},{},{},{:.10e}", g + 1, s + 1, t + 1, p[g]).unwrap();
            }
        }
    }
    out
}
