//! Static grid data and the line-oriented case file format.
//!
//! ```text
//! [config]
//! ref_bus = 1
//! base_mva = 100
//! [buses]        # id, load_mw
//! 1, 0.0
//! [lines]        # from, to, x_pu, limit_mw
//! 1, 2, 0.10, 150
//! [generators]   # bus, pmin, pmax, ru, rd, min_up, min_down, su, sd, c0, c1, c2
//! 1, 10, 100, 60, 60, 2, 2, 500, 200, 100, 20, 0.05
//! [wind]         # bus, mu_lo, mu_hi, sigma_lo, sigma_hi
//! 2, 10, 40, 2, 12
//! ```
//!
//! Bus references in the file are external ids; the model stores indices.
//! A `[wind]` row holding only a bus id takes the default intervals.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::GridError;

#[derive(Clone, Debug, PartialEq)]
pub struct Bus {
    /// External id as written in the case file.
    pub id: usize,
    pub load_mw: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    pub x_pu: f64,
    pub limit_mw: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub min_up: usize,
    pub min_down: usize,
    pub startup_cost: f64,
    pub shutdown_cost: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Generator {
    /// `c2 p^2 + c1 p + c0`.
    pub fn cost(&self, p: f64) -> f64 {
        self.c2 * p * p + self.c1 * p + self.c0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// How a wind unit's standard deviation is sampled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SigmaRange {
    /// Uniform in an absolute MW interval.
    Absolute(Interval),
    /// Uniform fraction of the unit's drawn mean.
    RelativeToMu(Interval),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindUnit {
    pub bus: usize,
    pub mu: Interval,
    pub sigma: SigmaRange,
}

/// Default mean interval as fractions of total nominal load.
pub const DEFAULT_MU_FRACTION: Interval = Interval { lo: 0.02, hi: 0.08 };
/// Default sigma as fractions of the drawn mean.
pub const DEFAULT_SIGMA_FRACTION: Interval = Interval { lo: 0.10, hi: 0.30 };

#[derive(Clone, Debug, PartialEq)]
pub struct SystemCase {
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    pub wind_units: Vec<WindUnit>,
    pub ref_bus: usize,
    pub base_mva: f64,
}

impl SystemCase {
    pub fn num_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn num_wind(&self) -> usize {
        self.wind_units.len()
    }

    pub fn total_load(&self) -> f64 {
        self.buses.iter().map(|b| b.load_mw).sum()
    }

    pub fn total_capacity(&self) -> f64 {
        self.generators.iter().map(|g| g.p_max).sum()
    }

    /// Generator indices grouped by bus.
    pub fn generators_at(&self, bus: usize) -> impl Iterator<Item = usize> + '_ {
        self.generators
            .iter()
            .enumerate()
            .filter(move |(_, g)| g.bus == bus)
            .map(|(k, _)| k)
    }

    /// Feature names in the fixed `[mu.., sigma.., pg..]` order.
    pub fn feature_names(&self) -> Vec<String> {
        let w = self.num_wind();
        (1..=w)
            .map(|k| format!("mu_{k}"))
            .chain((1..=w).map(|k| format!("sigma_{k}")))
            .chain((1..=self.num_generators()).map(|k| format!("pg_{k}")))
            .collect()
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let nb = self.buses.len();
        let bad = |msg: String| Err(GridError::Validation(msg));
        if nb == 0 {
            return bad("case has no buses".into());
        }
        if self.ref_bus >= nb {
            return bad(format!("reference bus index {} out of range", self.ref_bus));
        }
        if !(self.base_mva > 0.0 && self.base_mva.is_finite()) {
            return bad(format!("base_mva must be positive, got {}", self.base_mva));
        }
        let mut ids = HashMap::new();
        for (i, b) in self.buses.iter().enumerate() {
            if ids.insert(b.id, i).is_some() {
                return bad(format!("duplicate bus id {}", b.id));
            }
            if !(b.load_mw >= 0.0 && b.load_mw.is_finite()) {
                return bad(format!("bus {} has negative or non-finite load", b.id));
            }
        }
        for (k, l) in self.lines.iter().enumerate() {
            if l.from >= nb || l.to >= nb {
                return bad(format!("line {} references a missing bus", k + 1));
            }
            if l.from == l.to {
                return bad(format!("line {} connects bus {} to itself", k + 1, self.buses[l.from].id));
            }
            if !(l.x_pu > 0.0 && l.x_pu.is_finite()) {
                return bad(format!("line {} has non-positive reactance {}", k + 1, l.x_pu));
            }
            if !(l.limit_mw > 0.0 && l.limit_mw.is_finite()) {
                return bad(format!("line {} has non-positive limit {}", k + 1, l.limit_mw));
            }
        }
        for (k, g) in self.generators.iter().enumerate() {
            let id = k + 1;
            if g.bus >= nb {
                return bad(format!("generator {id} references a missing bus"));
            }
            let vals = [
                g.p_min, g.p_max, g.ramp_up, g.ramp_down, g.startup_cost, g.shutdown_cost, g.c0, g.c1, g.c2,
            ];
            if vals.iter().any(|v| !v.is_finite()) {
                return bad(format!("generator {id} has a non-finite parameter"));
            }
            if !(0.0 <= g.p_min && g.p_min <= g.p_max) {
                return bad(format!("generator {id} needs 0 <= pmin <= pmax"));
            }
            if g.ramp_up <= 0.0 || g.ramp_down <= 0.0 {
                return bad(format!("generator {id} needs positive ramp limits"));
            }
            if g.min_up < 1 || g.min_down < 1 {
                return bad(format!("generator {id} needs min_up, min_down >= 1"));
            }
            if g.c2 < 0.0 {
                return bad(format!("generator {id} has a concave cost (c2 < 0)"));
            }
            if g.startup_cost < 0.0 || g.shutdown_cost < 0.0 {
                return bad(format!("generator {id} has negative start/stop cost"));
            }
        }
        for (k, w) in self.wind_units.iter().enumerate() {
            if w.bus >= nb {
                return bad(format!("wind unit {} references a missing bus", k + 1));
            }
            let sigma = match w.sigma {
                SigmaRange::Absolute(i) | SigmaRange::RelativeToMu(i) => i,
            };
            for (name, i) in [("mu", w.mu), ("sigma", sigma)] {
                if !(0.0 <= i.lo && i.lo <= i.hi && i.hi.is_finite()) {
                    return bad(format!("wind unit {} needs 0 <= {name}_lo <= {name}_hi", k + 1));
                }
            }
        }
        // connectivity
        let mut adj = vec![Vec::new(); nb];
        for l in &self.lines {
            adj[l.from].push(l.to);
            adj[l.to].push(l.from);
        }
        let mut seen = vec![false; nb];
        let mut queue = VecDeque::from([self.ref_bus]);
        seen[self.ref_bus] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return bad(format!(
                "network is disconnected: bus {} unreachable from the reference bus",
                self.buses[i].id
            ));
        }
        Ok(())
    }

    /// Serializes back to the case format (round-trips through [`parse_case`]).
    pub fn to_case_text(&self) -> String {
        let id = |i: usize| self.buses[i].id;
        let mut s = String::new();
        let _ = writeln!(s, "[config]\nref_bus = {}\nbase_mva = {}", id(self.ref_bus), self.base_mva);
        let _ = writeln!(s, "[buses]");
        for b in &self.buses {
            let _ = writeln!(s, "{}, {}", b.id, b.load_mw);
        }
        let _ = writeln!(s, "[lines]");
        for l in &self.lines {
            let _ = writeln!(s, "{}, {}, {}, {}", id(l.from), id(l.to), l.x_pu, l.limit_mw);
        }
        let _ = writeln!(s, "[generators]");
        for g in &self.generators {
            let _ = writeln!(
                s,
                "{}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}",
                id(g.bus),
                g.p_min,
                g.p_max,
                g.ramp_up,
                g.ramp_down,
                g.min_up,
                g.min_down,
                g.startup_cost,
                g.shutdown_cost,
                g.c0,
                g.c1,
                g.c2
            );
        }
        let _ = writeln!(s, "[wind]");
        for w in &self.wind_units {
            match w.sigma {
                SigmaRange::Absolute(sg) => {
                    let _ = writeln!(s, "{}, {}, {}, {}, {}", id(w.bus), w.mu.lo, w.mu.hi, sg.lo, sg.hi);
                }
                SigmaRange::RelativeToMu(_) => {
                    let _ = writeln!(s, "{}", id(w.bus));
                }
            }
        }
        s
    }
}

/// SHA-256 of the case text, hex encoded.
pub fn case_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Config,
    Buses,
    Lines,
    Generators,
    Wind,
}

pub fn parse_case(text: &str) -> Result<SystemCase, GridError> {
    let mut section = Section::None;
    let mut ref_id: Option<usize> = None;
    let mut base_mva = 100.0;
    let mut buses: Vec<Bus> = Vec::new();
    // raw rows keep external ids until all buses are known
    let mut lines: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut gens: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut wind: Vec<(usize, Vec<f64>)> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let err = |reason: String| GridError::Parse {
            line: lineno,
            reason,
        };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            section = match content {
                "[config]" => Section::Config,
                "[buses]" => Section::Buses,
                "[lines]" => Section::Lines,
                "[generators]" => Section::Generators,
                "[wind]" => Section::Wind,
                other => return Err(err(format!("unknown section {other}"))),
            };
            continue;
        }
        if section == Section::Config {
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{content}'")))?;
            let value = value.trim();
            match key.trim() {
                "ref_bus" => {
                    ref_id = Some(value.parse().map_err(|_| err(format!("bad ref_bus '{value}'")))?)
                }
                "base_mva" => {
                    base_mva = value.parse().map_err(|_| err(format!("bad base_mva '{value}'")))?
                }
                other => return Err(err(format!("unknown config key '{other}'"))),
            }
            continue;
        }
        let fields: Vec<f64> = content
            .split(',')
            .map(|f| {
                let f = f.trim();
                f.parse::<f64>().map_err(|_| err(format!("'{f}' is not a number")))
            })
            .collect::<Result<_, _>>()?;
        let bus_id = |v: f64| -> Result<usize, GridError> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(err(format!("'{v}' is not a bus id")))
            }
        };
        let expect = |n: &[usize]| -> Result<(), GridError> {
            if n.contains(&fields.len()) {
                Ok(())
            } else {
                Err(err(format!("expected {:?} fields, found {}", n, fields.len())))
            }
        };
        match section {
            Section::None => return Err(err("data before any section header".into())),
            Section::Config => unreachable!(),
            Section::Buses => {
                expect(&[2])?;
                buses.push(Bus {
                    id: bus_id(fields[0])?,
                    load_mw: fields[1],
                });
            }
            Section::Lines => {
                expect(&[4])?;
                lines.push((lineno, fields));
            }
            Section::Generators => {
                expect(&[12])?;
                for (name, pos) in [("min_up", 5), ("min_down", 6)] {
                    if fields[pos].fract() != 0.0 || fields[pos] < 0.0 {
                        return Err(err(format!("{name} must be a whole number of hours")));
                    }
                }
                gens.push((lineno, fields));
            }
            Section::Wind => {
                expect(&[1, 5])?;
                wind.push((lineno, fields));
            }
        }
    }

    let index: HashMap<usize, usize> = buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
    let lookup = |id: f64, lineno: usize| -> Result<usize, GridError> {
        index
            .get(&(id as usize))
            .copied()
            .filter(|_| id >= 0.0 && id.fract() == 0.0)
            .ok_or_else(|| GridError::Validation(format!("line {lineno}: bus {id} does not exist")))
    };
    let ref_id = ref_id.ok_or_else(|| GridError::Validation("missing ref_bus in [config]".into()))?;
    let ref_bus = *index
        .get(&ref_id)
        .ok_or_else(|| GridError::Validation(format!("reference bus {ref_id} does not exist")))?;
    let total_load: f64 = buses.iter().map(|b| b.load_mw).sum();

    let case = SystemCase {
        lines: lines
            .iter()
            .map(|(ln, f)| {
                Ok(Line {
                    from: lookup(f[0], *ln)?,
                    to: lookup(f[1], *ln)?,
                    x_pu: f[2],
                    limit_mw: f[3],
                })
            })
            .collect::<Result<_, GridError>>()?,
        generators: gens
            .iter()
            .map(|(ln, f)| {
                Ok(Generator {
                    bus: lookup(f[0], *ln)?,
                    p_min: f[1],
                    p_max: f[2],
                    ramp_up: f[3],
                    ramp_down: f[4],
                    min_up: f[5] as usize,
                    min_down: f[6] as usize,
                    startup_cost: f[7],
                    shutdown_cost: f[8],
                    c0: f[9],
                    c1: f[10],
                    c2: f[11],
                })
            })
            .collect::<Result<_, GridError>>()?,
        wind_units: wind
            .iter()
            .map(|(ln, f)| {
                let bus = lookup(f[0], *ln)?;
                Ok(if f.len() == 5 {
                    WindUnit {
                        bus,
                        mu: Interval::new(f[1], f[2]),
                        sigma: SigmaRange::Absolute(Interval::new(f[3], f[4])),
                    }
                } else {
                    WindUnit {
                        bus,
                        mu: Interval::new(DEFAULT_MU_FRACTION.lo * total_load, DEFAULT_MU_FRACTION.hi * total_load),
                        sigma: SigmaRange::RelativeToMu(DEFAULT_SIGMA_FRACTION),
                    }
                })
            })
            .collect::<Result<_, GridError>>()?,
        buses,
        ref_bus,
        base_mva,
    };
    case.validate()?;
    Ok(case)
}
