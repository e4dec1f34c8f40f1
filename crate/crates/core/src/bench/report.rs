use std::fmt::Write as _;

use crate::svm::ConfusionMatrix;
use crate::tsuc::constraint_counts;

/// One timed solve of one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeRun {
    pub objective: f64,
    /// Median over repeats, rounded to 3 significant digits.
    pub wall_time_ms: f64,
    pub nodes: usize,
    /// Network rows: line-flow rows in full mode, surrogate rows otherwise.
    pub constraint_count: usize,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub confusion: ConfusionMatrix,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub full: Result<ModeRun, String>,
    pub surrogate: Result<ModeRun, String>,
    pub classification: Option<Classification>,
}

impl TrialRow {
    pub fn cost_error_pct(&self) -> Option<f64> {
        let (f, s) = (self.full.as_ref().ok()?, self.surrogate.as_ref().ok()?);
        Some(100.0 * (s.objective - f.objective).abs() / f.objective)
    }

    pub fn time_saving_pct(&self) -> Option<f64> {
        let (f, s) = (self.full.as_ref().ok()?, self.surrogate.as_ref().ok()?);
        Some(100.0 * (f.wall_time_ms - s.wall_time_ms) / f.wall_time_ms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinAvgMax {
    pub min: f64,
    pub avg: f64,
    pub max: f64,
}

impl MinAvgMax {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(Self {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            avg: values.iter().sum::<f64>() / values.len() as f64,
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aggregates {
    pub cost_error_pct: Option<MinAvgMax>,
    pub time_saving_pct: Option<MinAvgMax>,
    pub reduction_pct: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkReport {
    pub case_name: String,
    pub lines: usize,
    pub scenarios: usize,
    pub horizon: usize,
    pub gap_tol: f64,
    /// False when trials ran concurrently.
    pub timing_comparable: bool,
    pub trials: Vec<TrialRow>,
}

/// Rounds to 3 significant digits.
pub fn sig3(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(2 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

fn fmt_sig3(x: f64) -> String {
    let x = sig3(x);
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = (2 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

impl BenchmarkReport {
    /// Pure function of the trial rows.
    pub fn aggregates(&self) -> Aggregates {
        let costs: Vec<f64> = self.trials.iter().filter_map(TrialRow::cost_error_pct).collect();
        let times: Vec<f64> = self.trials.iter().filter_map(TrialRow::time_saving_pct).collect();
        Aggregates {
            cost_error_pct: MinAvgMax::of(&costs),
            time_saving_pct: MinAvgMax::of(&times),
            reduction_pct: constraint_counts(self.lines, self.scenarios, self.horizon).2,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        writeln!(
            w,
            "# case={} lines={} scenarios={} horizon={} gap_tol={:e} timing={}",
            self.case_name,
            self.lines,
            self.scenarios,
            self.horizon,
            self.gap_tol,
            if self.timing_comparable { "comparable" } else { "non-comparable" }
        )
        .unwrap();
        writeln!(w, "trial,seed,mode,status,objective,wall_time_ms,nodes,constraint_count,gap").unwrap();
        for t in &self.trials {
            for (mode, run) in [("full", &t.full), ("surrogate", &t.surrogate)] {
                match run {
                    Ok(r) => writeln!(
                        w,
                        "{},{},{mode},ok,{:.6},{},{},{},{:.2e}",
                        t.trial,
                        t.seed,
                        r.objective,
                        fmt_sig3(r.wall_time_ms),
                        r.nodes,
                        r.constraint_count,
                        r.gap
                    ),
                    Err(e) => writeln!(w, "{},{},{mode},\"{}\",,,,,", t.trial, t.seed, e.replace('"', "'")),
                }
                .unwrap();
            }
        }
        writeln!(w).unwrap();
        writeln!(w, "trial,true_neg,false_pos,false_neg,true_pos,accuracy,margin").unwrap();
        for t in &self.trials {
            if let Some(c) = &t.classification {
                let m = &c.confusion;
                writeln!(
                    w,
                    "{},{},{},{},{},{:.4},{:.6e}",
                    t.trial,
                    m.true_neg,
                    m.false_pos,
                    m.false_neg,
                    m.true_pos,
                    m.accuracy(),
                    c.margin
                )
                .unwrap();
            }
        }
        writeln!(w).unwrap();
        let a = self.aggregates();
        writeln!(w, "metric,min,avg,max").unwrap();
        for (name, v) in [("cost_error_pct", a.cost_error_pct), ("time_saving_pct", a.time_saving_pct)] {
            match v {
                Some(v) => writeln!(w, "{name},{:.2},{:.2},{:.2}", v.min, v.avg, v.max),
                None => writeln!(w, "{name},,,"),
            }
            .unwrap();
        }
        let r = a.reduction_pct;
        writeln!(w, "reduction_pct,{r:.2},{r:.2},{r:.2}").unwrap();
        out
    }

    pub fn summary(&self) -> String {
        let a = self.aggregates();
        let ok = self.trials.iter().filter(|t| t.cost_error_pct().is_some()).count();
        let mut s = format!(
            "{}: {ok}/{} paired trials solved (S={}, T={}, gap_tol={:e})\n",
            self.case_name,
            self.trials.len(),
            self.scenarios,
            self.horizon,
            self.gap_tol
        );
        let (full, sur, _) = constraint_counts(self.lines, self.scenarios, self.horizon);
        writeln!(s, "network rows: {full} full vs {sur} surrogate, reduction {:.2}%", a.reduction_pct).unwrap();
        if let Some(c) = a.cost_error_pct {
            writeln!(s, "cost error %: min {:.2} avg {:.2} max {:.2}", c.min, c.avg, c.max).unwrap();
        }
        if let Some(t) = a.time_saving_pct {
            writeln!(s, "time saving %: min {:.2} avg {:.2} max {:.2}", t.min, t.avg, t.max).unwrap();
        }
        if !self.timing_comparable {
            writeln!(s, "timings are not comparable: trials ran concurrently").unwrap();
        }
        for t in &self.trials {
            for (mode, r) in [("full", &t.full), ("surrogate", &t.surrogate)] {
                if let Err(e) = r {
                    writeln!(s, "trial {} {mode}: {e}", t.trial).unwrap();
                }
            }
        }
        s
    }
}
