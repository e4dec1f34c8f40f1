use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ucsm::grid::{fixtures, parse_case, SystemCase};
use ucsm::scenario::{build_scenarios, generate_dataset, Scenario, WindParams};
use ucsm::svm::{train_on_dataset, Hyperplane, SvmConfig};
use ucsm::tsuc::{
    brute_force_tsuc, build_feature_vector, build_milp, check_solution, solution_report, solve_tsuc, Mode,
    SolveOptions, TsucError, TsucInstance, TsucSolution,
};

const TWO_BUS_ONE_UNIT: &str = "\
[config]
ref_bus = 1
[buses]
1, 0
2, 50
[lines]
1, 2, 0.1, 100
[generators]
1, 10, 100, 100, 100, 1, 1, 500, 0, 30, 10, 0.05
";

// cheap base unit plus a peaker that must stay on two hours once started
const SPIKE: &str = "\
[config]
ref_bus = 1
[buses]
1, 0
2, 100
[lines]
1, 2, 0.1, 500
[generators]
1, 0, 100, 100, 100, 1, 1, 0, 0, 0, 10, 0
2, 10, 100, 100, 100, 2, 1, 50, 0, 20, 30, 0
";

fn fixed_scenarios(case: &SystemCase, multipliers: &[f64]) -> Vec<Scenario> {
    let nw = case.num_wind();
    vec![Scenario {
        probability: 1.0,
        z_value: 0.0,
        wind: WindParams { mu: vec![0.0; nw], sigma: vec![0.0; nw] },
        wind_mw: vec![vec![0.0; nw]; multipliers.len()],
        load_multiplier: multipliers.iter().map(|&m| vec![m; case.num_buses()]).collect(),
    }]
}

fn solve_checked(inst: &TsucInstance, opts: &SolveOptions) -> Result<TsucSolution, TsucError> {
    let sol = solve_tsuc(inst, opts)?;
    check_solution(inst, &sol).unwrap();
    assert!(sol.stats.root_bound <= sol.objective + 1e-6, "root bound above incumbent");
    Ok(sol)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

#[test]
fn single_unit_forced_schedule() {
    let case = parse_case(TWO_BUS_ONE_UNIT).unwrap();
    let mut inst = TsucInstance::new(case.clone(), fixed_scenarios(&case, &[1.0, 1.0]), 2, Mode::FullNetwork);
    inst.initial_status = vec![true];
    inst.pwl_segments = 1;
    let sol = solve_checked(&inst, &SolveOptions::default()).unwrap();
    assert_eq!(sol.schedule.u, vec![vec![true, true]]);
    assert_eq!(sol.schedule.y, vec![vec![false, false]]);
    // a single segment prices dispatch on the chord through (pmin, pmax)
    let pw = ucsm::tsuc::pwl::pwl_cost(&case.generators[0], 1);
    assert!((sol.objective - 2.0 * pw.eval(50.0)).abs() < 1e-6);
    let brute = brute_force_tsuc(&inst).unwrap();
    assert!((brute.objective - sol.objective).abs() < 1e-6);

    // starting from off adds exactly one startup
    inst.initial_status = vec![false];
    let sol = solve_checked(&inst, &SolveOptions::default()).unwrap();
    assert_eq!(sol.schedule.y, vec![vec![true, false]]);
    assert!((sol.objective - 2.0 * pw.eval(50.0) - 500.0).abs() < 1e-6);
}

#[test]
fn min_up_keeps_peaker_on_after_spike() {
    let case = parse_case(SPIKE).unwrap();
    let inst = TsucInstance::new(case.clone(), fixed_scenarios(&case, &[1.3, 0.8, 0.8, 0.8]), 4, Mode::FullNetwork);
    let brute = brute_force_tsuc(&inst).unwrap();
    assert_eq!(brute.schedule.u[1], vec![true, true, false, false]);
    let sol = solve_checked(&inst, &SolveOptions::default()).unwrap();
    assert_eq!(sol.schedule.u[1], vec![true, true, false, false]);
    assert!(rel(sol.objective, brute.objective) < 1e-6);
}

#[test]
fn demand_above_capacity_is_infeasible() {
    let case = parse_case(TWO_BUS_ONE_UNIT).unwrap();
    let inst = TsucInstance::new(case.clone(), fixed_scenarios(&case, &[1.0, 2.5]), 2, Mode::FullNetwork);
    assert_eq!(solve_tsuc(&inst, &SolveOptions::default()).unwrap_err(), TsucError::Infeasible);
    assert_eq!(brute_force_tsuc(&inst).unwrap_err(), TsucError::Infeasible);
}

#[test]
fn brute_force_rejects_large_instances() {
    let case = parse_case(fixtures::SIX_BUS).unwrap();
    let inst = TsucInstance::new(case.clone(), build_scenarios(&case, 1, 6, 1).unwrap(), 6, Mode::FullNetwork);
    assert!(matches!(brute_force_tsuc(&inst), Err(TsucError::TooLarge { binaries: 18, .. })));
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
        g.ramp_up = rng.random_range(g.p_min + 10.0..=g.p_max);
        g.ramp_down = rng.random_range(g.p_min + 10.0..=g.p_max);
        g.startup_cost *= rng.random_range(0.2..2.0);
        g.c1 *= rng.random_range(0.7..1.3);
    }
    let scenarios = build_scenarios(&case, rng.random_range(1..=2), horizon, seed).unwrap();
    let mut inst = TsucInstance::new(case, scenarios, horizon, Mode::FullNetwork);
    inst.initial_status = (0..inst.case.num_generators()).map(|_| rng.random_bool(0.5)).collect();
    inst.pwl_segments = rng.random_range(1..=4);
    inst
}

#[test]
fn branch_and_bound_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut agreed = 0;
    for k in 0..24 {
        let inst = fuzzed_instance(&mut rng, k);
        assert!(inst.case.num_generators() * inst.horizon <= 12);
        let brute = brute_force_tsuc(&inst);
        let bnb = solve_tsuc(&inst, &SolveOptions::default());
        match (brute, bnb) {
            (Ok(b), Ok(s)) => {
                check_solution(&inst, &s).unwrap();
                check_solution(&inst, &b).unwrap();
                assert!(rel(s.objective, b.objective) <= 1e-6, "instance {k}: {} vs {}", s.objective, b.objective);
                agreed += 1;
            }
            (Err(TsucError::Infeasible), Err(TsucError::Infeasible)) => {}
            (b, s) => panic!("instance {k}: brute {:?} vs bnb {:?}", b.map(|x| x.objective), s.map(|x| x.objective)),
        }
    }
    assert!(agreed >= 20, "only {agreed} feasible instances");
}

#[test]
fn eight_segments_are_close_to_sixty_four() {
    let case = parse_case(fixtures::SIX_BUS).unwrap();
    let sc = build_scenarios(&case, 3, 4, 11).unwrap();
    let mut inst = TsucInstance::new(case, sc, 4, Mode::FullNetwork);
    let coarse = solve_checked(&inst, &SolveOptions::default()).unwrap().objective;
    inst.pwl_segments = 64;
    let fine = solve_checked(&inst, &SolveOptions::default()).unwrap().objective;
    // secants over-approximate, so refining can only lower the cost
    assert!(fine <= coarse * (1.0 + 1e-6));
    assert!(rel(coarse, fine) <= 0.005, "{coarse} vs {fine}");
}

#[test]
fn tighter_lines_never_lower_the_optimum() {
    for (name, text) in [("three_bus", fixtures::THREE_BUS), ("six_bus", fixtures::SIX_BUS)] {
        let case = parse_case(text).unwrap();
        let sc = build_scenarios(&case, 2, 4, 5).unwrap();
        let inst = TsucInstance::new(case.clone(), sc.clone(), 4, Mode::FullNetwork);
        let base = solve_checked(&inst, &SolveOptions::default()).unwrap().objective;
        let mut tight = case;
        for l in &mut tight.lines {
            l.limit_mw *= 0.5;
        }
        let inst = TsucInstance::new(tight, sc, 4, Mode::FullNetwork);
        match solve_checked(&inst, &SolveOptions::default()) {
            Ok(sol) => assert!(sol.objective >= base * (1.0 - 1e-6) - 1e-9, "{name}: {} < {base}", sol.objective),
            Err(TsucError::Infeasible) => {}
            Err(e) => panic!("{name}: {e}"),
        }
    }
}

#[test]
fn surrogate_keeps_network_feasible_points_that_satisfy_it() {
    let case = parse_case(fixtures::SIX_BUS).unwrap();
    let data = generate_dataset(&case, 300, 3).unwrap();
    let h = train_on_dataset(&data, &SvmConfig::default()).unwrap().model.hyperplane;
    let mut checked = 0;
    for seed in 0..8 {
        let sc = build_scenarios(&case, 2, 3, seed).unwrap();
        let full = TsucInstance::new(case.clone(), sc.clone(), 3, Mode::FullNetwork);
        let fs = solve_checked(&full, &SolveOptions::default()).unwrap();
        let sur = TsucInstance::new(case.clone(), sc.clone(), 3, Mode::Surrogate(h.clone()));
        let ss = solve_checked(&sur, &SolveOptions::default()).unwrap();
        let full_point_admissible = sc.iter().enumerate().all(|(s, scen)| {
            (0..3).all(|t| {
                let phi = build_feature_vector(scen, &fs.dispatch[s][t], &h.feature_names).unwrap();
                h.decision(&phi) >= 0.0
            })
        });
        if full_point_admissible {
            // the full optimum is feasible for the surrogate model too
            assert!(ss.objective <= fs.objective * (1.0 + 1e-6), "seed {seed}");
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn surrogate_rejects_foreign_hyperplane() {
    let six = parse_case(fixtures::SIX_BUS).unwrap();
    let three = parse_case(fixtures::THREE_BUS).unwrap();
    let names = three.feature_names();
    let h = Hyperplane::physical(names.clone(), vec![0.0; names.len()], 1.0);
    let sc = build_scenarios(&six, 1, 2, 1).unwrap();
    let inst = TsucInstance::new(six, sc, 2, Mode::Surrogate(h));
    assert!(matches!(solve_tsuc(&inst, &SolveOptions::default()), Err(TsucError::FeatureMismatch(_))));
}

#[test]
fn six_bus_counts_and_report() {
    let case = parse_case(fixtures::SIX_BUS).unwrap();
    let data = generate_dataset(&case, 100, 1).unwrap();
    let h = train_on_dataset(&data, &SvmConfig::default()).unwrap().model.hyperplane;
    let sc = build_scenarios(&case, 3, 4, 1).unwrap();
    let full = TsucInstance::new(case.clone(), sc.clone(), 4, Mode::FullNetwork);
    let sur = TsucInstance::new(case, sc, 4, Mode::Surrogate(h));
    let fm = build_milp(&full).unwrap();
    let sm = build_milp(&sur).unwrap();
    assert_eq!((fm.counts.flow_rows, fm.counts.surrogate_rows), (168, 0));
    assert_eq!((sm.counts.flow_rows, sm.counts.surrogate_rows), (0, 12));
    assert_eq!(fm.counts.total_rows - sm.counts.total_rows, 168 - 12);

    let sol = solve_checked(&full, &SolveOptions::default()).unwrap();
    let report = solution_report(&sol);
    let blocks: Vec<&str> = report.split("\n\n").collect();
    assert_eq!(blocks.len(), 3);
    assert!(blocks[0].contains("mode,full") && blocks[0].contains("flow_rows,168"));
    assert_eq!(blocks[1].lines().count(), 1 + 3 * 4);
    assert_eq!(blocks[2].trim_end().lines().count(), 1 + 3 * 3 * 4);
}
