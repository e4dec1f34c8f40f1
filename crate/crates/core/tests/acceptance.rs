//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Heavier criteria share the trained models of criterion 6.

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ucsm::dcopf::{dcopf_lp, net_injections, solve_dcopf, DcopfStatus, Label};
use ucsm::grid::{build_matrices, fixtures, parse_case, SystemCase};
use ucsm::lp::{solve_lp, vertex_enumeration, LpProblem, VertexOutcome};
use ucsm::scenario::{build_scenarios, generate_dataset, sample_load_multipliers, sample_z, substream, sample_wind_params};
use ucsm::svm::{sign, train_on_dataset, train_svm, Hyperplane, SvmConfig};
use ucsm::tsuc::{
    brute_force_tsuc, build_milp, check_solution, constraint_counts, solve_tsuc, Mode, SolveOptions, TsucError,
    TsucInstance,
};

type Outcome = Result<String, String>;

fn fixture(name: &str) -> SystemCase {
    parse_case(fixtures::by_name(name).unwrap()).unwrap()
}

fn criterion_1() -> Outcome {
    let mut notes = Vec::new();
    for (l, s, t, full, sur, red) in [(80, 20, 24, 76_800, 480, "99.38"), (186, 50, 24, 446_400, 1_200, "99.73")] {
        let (f, g, r) = constraint_counts(l, s, t);
        if (f, g) != (full, sur) || format!("{r:.2}") != red {
            return Err(format!("|L|={l}: {f} vs {g} rows, {r:.2}%"));
        }
        notes.push(format!("{f} vs {g} ({r:.2}%)"));
    }
    // the builder's own counts agree with the arithmetic
    let case = fixture("six_bus");
    let sc = build_scenarios(&case, 3, 4, 1).unwrap();
    let h = Hyperplane::physical(case.feature_names(), vec![0.0; case.feature_names().len()], 1.0);
    let full = build_milp(&TsucInstance::new(case.clone(), sc.clone(), 4, Mode::FullNetwork)).unwrap();
    let sur = build_milp(&TsucInstance::new(case, sc, 4, Mode::Surrogate(h))).unwrap();
    if (full.counts.flow_rows, sur.counts.flow_rows, sur.counts.surrogate_rows) != (168, 0, 12) {
        return Err(format!("6-bus builder counts {:?} / {:?}", full.counts, sur.counts));
    }
    Ok(format!("{}; 6-bus builder 168 vs 12", notes.join(", ")))
}

fn fuzzed_instance(rng: &mut ChaCha8Rng, seed: u64) -> TsucInstance {
    let (text, horizon) = if rng.random_bool(0.5) {
        (fixtures::THREE_BUS, rng.random_range(2..=6))
    } else {
        (fixtures::SIX_BUS, rng.random_range(2..=4))
    };
    let mut case = parse_case(text).unwrap();
    for l in &mut case.lines {
        l.limit_mw *= rng.random_range(0.6..1.5);
    }
    for g in &mut case.generators {
        g.min_up = rng.random_range(1..=3);
        g.min_down = rng.random_range(1..=3);
        g.startup_cost *= rng.random_range(0.2..2.0);
        g.c1 *= rng.random_range(0.7..1.3);
    }
    let scenarios = build_scenarios(&case, rng.random_range(1..=3), horizon, seed).unwrap();
    let mut inst = TsucInstance::new(case, scenarios, horizon, Mode::FullNetwork);
    inst.initial_status = (0..inst.case.num_generators()).map(|_| rng.random_bool(0.5)).collect();
    inst
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut compared, mut worst) = (0, 0.0f64);
    let mut k = 0;
    while compared < 20 {
        if k >= 60 {
            return Err(format!("only {compared} feasible instances in {k} draws"));
        }
        let inst = fuzzed_instance(&mut rng, 1000 + k);
        k += 1;
        match (solve_tsuc(&inst, &SolveOptions::default()), brute_force_tsuc(&inst)) {
            (Ok(s), Ok(b)) => {
                check_solution(&inst, &s).map_err(|e| format!("instance {k}: {e}"))?;
                let rel = (s.objective - b.objective).abs() / b.objective.abs();
                worst = worst.max(rel);
                if rel > 1e-6 {
                    return Err(format!("instance {k}: {} vs {}", s.objective, b.objective));
                }
                compared += 1;
            }
            (Err(TsucError::Infeasible), Err(TsucError::Infeasible)) => {}
            (s, b) => return Err(format!("instance {k}: {:?} vs {:?}", s.map(|x| x.objective), b.map(|x| x.objective))),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs > 60.0 {
        return Err(format!("took {secs:.1} s"));
    }
    Ok(format!("{compared} instances, worst relative difference {worst:.1e}, {secs:.1} s"))
}

fn criterion_3() -> Outcome {
    let mut worst_flow = 0.0f64;
    let mut worst_resid = 0.0f64;
    for (name, text) in fixtures::ALL {
        let case = parse_case(text).unwrap();
        let m = build_matrices(&case).unwrap();
        for k in 0..1000 {
            let mut rng = substream(7, 3, k);
            let mut inj: Vec<f64> = (0..case.num_buses()).map(|_| rng.random_range(-100.0..100.0)).collect();
            let total: f64 = inj.iter().sum();
            inj[case.ref_bus] -= total;
            let a = m.flows_from_angles(&m.angles(&inj));
            let p = m.flows_from_injections(&inj);
            let d = a.iter().zip(&p).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            worst_flow = worst_flow.max(d);
            if d > 1e-8 {
                return Err(format!("{name} draw {k}: {d:e}"));
            }
        }
        // returned DCOPF solutions
        for k in 0..100 {
            let mut rng = substream(8, 3, k);
            let w = sample_wind_params(&case, &mut rng).realize(sample_z(&mut rng));
            let mult = sample_load_multipliers(case.num_buses(), &mut rng);
            let load: Vec<f64> = case.buses.iter().zip(&mult).map(|(b, x)| b.load_mw * x).collect();
            for enforce in [false, true] {
                let r = solve_dcopf(&case, &m, &w, &load, enforce, 8).unwrap();
                if r.status != DcopfStatus::Optimal {
                    continue;
                }
                let inj = net_injections(&case, &r.dispatch, &w, &load);
                let res = m.balance_residual(&r.angles, &inj);
                worst_resid = worst_resid.max(res);
                if res > 1e-6 {
                    return Err(format!("{name} DCOPF {k}: residual {res:e} MW"));
                }
            }
        }
        // returned TSUC solutions (the checker includes nodal balance)
        let sc = build_scenarios(&case, 2, 3, 4).unwrap();
        let inst = TsucInstance::new(case, sc, 3, Mode::FullNetwork);
        let sol = solve_tsuc(&inst, &SolveOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        check_solution(&inst, &sol).map_err(|e| format!("{name} TSUC: {e}"))?;
    }
    Ok(format!("worst PTDF/angle gap {worst_flow:.1e} MW, worst DCOPF residual {worst_resid:.1e} MW"))
}

fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = 6;
    let mut p = LpProblem::new(n);
    for j in 0..n {
        p.objective[j] = rng.random_range(-10.0..10.0);
        let lo = rng.random_range(-5.0..0.0);
        p.set_bounds(j, lo, lo + rng.random_range(1.0..8.0));
    }
    let x0: Vec<f64> = (0..n).map(|j| rng.random_range(p.lower[j]..p.upper[j])).collect();
    let n_eq = rng.random_range(0..3);
    for i in 0..4 {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.7) {
                terms.push((j, rng.random_range(-4.0..4.0)));
            }
        }
        let ax: f64 = terms.iter().map(|&(j, a)| a * x0[j]).sum();
        if i < n_eq {
            p.add_eq(&terms, ax);
        } else {
            p.add_le(&terms, ax + rng.random_range(0.0..3.0));
        }
    }
    p
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_gap = 0.0f64;
    let mut worst_diff = 0.0f64;
    for k in 0..100 {
        let p = random_lp(&mut rng);
        let s = solve_lp(&p).map_err(|e| e.to_string())?;
        let VertexOutcome::Optimal { objective, .. } = vertex_enumeration(&p, 1e-9).map_err(|e| e.to_string())? else {
            return Err(format!("lp {k}: oracle found no vertex"));
        };
        if !s.is_optimal() {
            return Err(format!("lp {k}: {:?}", s.status));
        }
        let d = (s.objective - objective).abs();
        worst_diff = worst_diff.max(d / (1.0 + objective.abs()));
        if d > 1e-8 * (1.0 + objective.abs()) {
            return Err(format!("lp {k}: {} vs oracle {objective}", s.objective));
        }
        let g = s.duality_gap(&p) / (1.0 + s.objective.abs());
        worst_gap = worst_gap.max(g);
        if g > 1e-6 {
            return Err(format!("lp {k}: duality gap {g:e}"));
        }
    }
    // DCOPF LPs on every fixture
    let mut dcopf_lps = 0;
    for (name, text) in fixtures::ALL {
        let case = parse_case(text).unwrap();
        let m = build_matrices(&case).unwrap();
        for k in 0..50 {
            let mut r = substream(9, 4, k);
            let w = sample_wind_params(&case, &mut r).realize(sample_z(&mut r));
            let mult = sample_load_multipliers(case.num_buses(), &mut r);
            let load: Vec<f64> = case.buses.iter().zip(&mult).map(|(b, x)| b.load_mw * x).collect();
            let lp = dcopf_lp(&case, &m, &w, &load, true, 8).unwrap();
            let s = solve_lp(&lp.problem).map_err(|e| e.to_string())?;
            if s.is_optimal() {
                let g = s.duality_gap(&lp.problem) / (1.0 + s.objective.abs());
                worst_gap = worst_gap.max(g);
                if g > 1e-6 {
                    return Err(format!("{name} DCOPF {k}: duality gap {g:e}"));
                }
                dcopf_lps += 1;
            }
        }
    }
    Ok(format!(
        "100 random LPs within {worst_diff:.1e} of the oracle; {dcopf_lps} DCOPF LPs; worst relative duality gap {worst_gap:.1e}"
    ))
}

fn criterion_5() -> Outcome {
    let names = vec!["x".to_string()];
    let cfg = SvmConfig { c_positive: 1e6, c_negative: 1e6, tolerance: 1e-10, ..Default::default() };
    let (h, r) = train_svm(&[[1.0], [-1.0]], &[Label::Feasible, Label::Infeasible], &names, &cfg).map_err(|e| e.to_string())?;
    let (w, b, g) = (h.weights_scaled[0], h.bias_scaled, r.margin);
    if (w - 1.0).abs() > 1e-6 || b.abs() > 1e-6 || (g - 1.0).abs() > 1e-6 {
        return Err(format!("toy gives w={w} b={b} margin={g}"));
    }
    let mut traces = 0;
    let mut checked = 0;
    for name in ["six_bus", "twentyfour_bus"] {
        let case = fixture(name);
        let d = generate_dataset(&case, 400, 5).map_err(|e| e.to_string())?;
        let t = train_on_dataset(&d, &SvmConfig::default()).map_err(|e| e.to_string())?;
        for (i, pair) in t.report.dual_trace.windows(2).enumerate() {
            if pair[1] < pair[0] - 1e-12 * (1.0 + pair[0].abs()) {
                return Err(format!("{name}: dual fell at pass {}: {} -> {}", i + 1, pair[0], pair[1]));
            }
        }
        traces += 1;
        let hp = &t.model.hyperplane;
        let st = &t.model.standardizer;
        for s in &d.samples {
            let phys = sign(hp.decision(&s.features));
            let scaled = sign(hp.decision_scaled(&st.transform(&s.features)));
            if phys != scaled {
                return Err(format!("{name} sample {}: physical {phys:?} vs scaled {scaled:?}", s.index));
            }
            checked += 1;
        }
    }
    Ok(format!("toy (w,b,margin)=({w:.6},{b:.1e},{g:.6}); {traces} monotone dual traces; {checked} samples sign-equivalent"))
}

struct Trained {
    name: &'static str,
    case: SystemCase,
    hyperplane: Hyperplane,
}

fn criterion_6(models: &mut Vec<Trained>) -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut failed = false;
    for name in ["six_bus", "twentyfour_bus"] {
        let case = fixture(name);
        let d = generate_dataset(&case, 1000, 1).map_err(|e| format!("{name}: {e}"))?;
        let t = train_on_dataset(&d, &SvmConfig::default()).map_err(|e| format!("{name}: {e}"))?;
        let c = t.test_confusion;
        let (acc, fpr) = (c.accuracy(), c.false_positive_rate());
        failed |= acc < 0.97 || fpr > 0.01;
        notes.push(format!("{name} accuracy {:.2}% FP {:.2}% on {} test samples", 100.0 * acc, 100.0 * fpr, c.total()));
        models.push(Trained { name, case, hyperplane: t.model.hyperplane });
    }
    let secs = start.elapsed().as_secs_f64();
    notes.push(format!("{secs:.1} s"));
    if failed || secs > 300.0 {
        Err(notes.join("; "))
    } else {
        Ok(notes.join("; "))
    }
}

fn paired(t: &Trained, s: usize, h: usize, seed: u64, opts: &SolveOptions) -> Result<(f64, f64, f64, f64), String> {
    let sc = build_scenarios(&t.case, s, h, seed).unwrap();
    let full_inst = TsucInstance::new(t.case.clone(), sc.clone(), h, Mode::FullNetwork);
    let full = solve_tsuc(&full_inst, opts).map_err(|e| format!("{} seed {seed} full: {e}", t.name))?;
    let sur_inst = TsucInstance::new(t.case.clone(), sc, h, Mode::Surrogate(t.hyperplane.clone()));
    let sur = solve_tsuc(&sur_inst, opts).map_err(|e| format!("{} seed {seed} surrogate: {e}", t.name))?;
    check_solution(&full_inst, &full).map_err(|e| format!("{} seed {seed} full: {e}", t.name))?;
    check_solution(&sur_inst, &sur).map_err(|e| format!("{} seed {seed} surrogate: {e}", t.name))?;
    Ok((full.objective, sur.objective, full.stats.wall_time_ms, sur.stats.wall_time_ms))
}

fn criterion_7(models: &[Trained]) -> Outcome {
    let opts = SolveOptions { gap_tol: 1e-6, ..Default::default() };
    let mut notes = Vec::new();
    let mut failed = false;
    for t in models {
        let mut errs = Vec::new();
        for seed in 1..=10 {
            match paired(t, 5, 6, seed, &opts) {
                Ok((f, s, _, _)) => errs.push(100.0 * (s - f).abs() / f),
                Err(e) => {
                    failed = true;
                    notes.push(e);
                }
            }
        }
        let avg = errs.iter().sum::<f64>() / errs.len().max(1) as f64;
        let max = errs.iter().copied().fold(0.0, f64::max);
        failed |= avg > 2.0 || max > 4.0;
        notes.push(format!("{} cost error avg {avg:.2}% max {max:.2}% over {} pairs", t.name, errs.len()));
    }
    if failed {
        Err(notes.join("; "))
    } else {
        Ok(notes.join("; "))
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn criterion_8(models: &[Trained]) -> Outcome {
    let t = models.iter().find(|m| m.name == "twentyfour_bus").ok_or("no 24-bus model")?;
    let (mut full, mut sur) = (Vec::new(), Vec::new());
    for seed in 1..=5 {
        let (_, _, tf, ts) = paired(t, 10, 24, seed, &SolveOptions::default())?;
        full.push(tf);
        sur.push(ts);
    }
    let (mf, ms) = (median(full), median(sur));
    let note = format!("median full {mf:.0} ms vs surrogate {ms:.0} ms ({:.1}% saving)", 100.0 * (mf - ms) / mf);
    if ms < mf {
        Ok(note)
    } else {
        Err(note)
    }
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |args: &[&str]| -> Result<(), String> {
        let o = Command::new(env!("CARGO_BIN_EXE_ucsm"))
            .args(args)
            .current_dir(dir.path())
            .env_remove("UCSM_CONFIG")
            .output()
            .map_err(|e| e.to_string())?;
        if o.status.success() {
            Ok(())
        } else {
            Err(String::from_utf8_lossy(&o.stderr).into_owned())
        }
    };
    for k in ["a", "b"] {
        run(&["gen-data", "--case", "six_bus", "--samples", "500", "--seed", "42", "--out", &format!("{k}.csv")])?;
        run(&["train", "--data", &format!("{k}.csv"), "--seed", "42", "--grid-search", "--out", &format!("{k}.model")])?;
    }
    let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
    if read("a.csv") != read("b.csv") {
        return Err("datasets differ".into());
    }
    if read("a.model") != read("b.model") {
        return Err("models differ".into());
    }
    Ok(format!("dataset ({} bytes) and model ({} bytes) byte-identical", read("a.csv").len(), read("a.model").len()))
}

fn main() {
    // `cargo test` passes harness flags; a name filter that excludes this target skips it
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let mut models = Vec::new();
    let mut results: Vec<(usize, Outcome)> = vec![
        (1, criterion_1()),
        (2, criterion_2()),
        (3, criterion_3()),
        (4, criterion_4()),
        (5, criterion_5()),
    ];
    results.push((6, criterion_6(&mut models)));
    results.push((7, criterion_7(&models)));
    results.push((8, criterion_8(&models)));
    results.push((9, criterion_9()));
    let mut failures = 0;
    for (k, r) in &results {
        match r {
            Ok(note) => println!("criterion {k}: PASS ({note})"),
            Err(note) => {
                failures += 1;
                println!("criterion {k}: FAIL ({note})");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failures, results.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
