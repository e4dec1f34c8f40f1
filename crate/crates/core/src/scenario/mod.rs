//! Wind/load uncertainty sampling and labeled dataset generation.

mod dataset;

pub use dataset::{
    generate_dataset, generate_dataset_with, split_indices, Dataset, GenerationConfig,
    GenerationStats, LabeledSample, Step,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{SigmaRange, SystemCase};

pub const LOAD_MULTIPLIER_MIN: f64 = 0.7;
pub const LOAD_MULTIPLIER_MAX: f64 = 1.3;
pub const Z_MIN: f64 = -4.0;
pub const Z_MAX: f64 = 4.0;
pub const Z_STEPS: usize = 81;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("class balancing failed after {attempts} rounds (minority/majority ratio {achieved_ratio:.3})")]
    BalancingFailed { attempts: usize, achieved_ratio: f64 },
    #[error(transparent)]
    Dcopf(#[from] crate::dcopf::DcopfError),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error("dataset line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("dataset header: {0}")]
    Header(String),
}

/// Independent RNG for `(seed, stream, index)`; streams never overlap so
/// results do not depend on evaluation order.
pub fn substream(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Per wind unit mean and standard deviation, MW.
#[derive(Clone, Debug, PartialEq)]
pub struct WindParams {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl WindParams {
    pub fn realize(&self, z: f64) -> Vec<f64> {
        self.mu
            .iter()
            .zip(&self.sigma)
            .map(|(&m, &s)| wind_realization(m, s, z))
            .collect()
    }
}

pub fn draw_wind_params(case: &SystemCase, seed: u64) -> WindParams {
    sample_wind_params(case, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_wind_params<R: Rng>(case: &SystemCase, rng: &mut R) -> WindParams {
    let mut mu = Vec::with_capacity(case.num_wind());
    let mut sigma = Vec::with_capacity(case.num_wind());
    for w in &case.wind_units {
        let m = rng.random_range(w.mu.lo..=w.mu.hi);
        let s = match w.sigma {
            SigmaRange::Absolute(iv) => rng.random_range(iv.lo..=iv.hi),
            SigmaRange::RelativeToMu(iv) => m * rng.random_range(iv.lo..=iv.hi),
        };
        mu.push(m);
        sigma.push(s);
    }
    WindParams { mu, sigma }
}

/// `max(0, mu + z sigma)`.
pub fn wind_realization(mu: f64, sigma: f64, z: f64) -> f64 {
    (mu + z * sigma).max(0.0)
}

/// -4.0, -3.9, ..., 4.0.
pub fn z_grid() -> Vec<f64> {
    (0..Z_STEPS).map(|i| (i as f64 - 40.0) / 10.0).collect()
}

pub fn sample_z<R: Rng>(rng: &mut R) -> f64 {
    (rng.random_range(0..Z_STEPS) as f64 - 40.0) / 10.0
}

pub fn sample_load_multipliers<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| rng.random_range(LOAD_MULTIPLIER_MIN..=LOAD_MULTIPLIER_MAX))
        .collect()
}

/// `[mu.., sigma.., pg..]`.
pub fn feature_vector(params: &WindParams, dispatch: &[f64]) -> Vec<f64> {
    params
        .mu
        .iter()
        .chain(&params.sigma)
        .chain(dispatch)
        .copied()
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub probability: f64,
    pub z_value: f64,
    pub wind: WindParams,
    /// `wind_mw[t][w]`.
    pub wind_mw: Vec<Vec<f64>>,
    /// `load_multiplier[t][bus]`.
    pub load_multiplier: Vec<Vec<f64>>,
}

impl Scenario {
    pub fn horizon(&self) -> usize {
        self.load_multiplier.len()
    }

    pub fn load_mw(&self, case: &SystemCase, t: usize) -> Vec<f64> {
        case.buses
            .iter()
            .zip(&self.load_multiplier[t])
            .map(|(b, m)| b.load_mw * m)
            .collect()
    }
}

pub fn build_scenarios(
    case: &SystemCase,
    n_scenarios: usize,
    horizon: usize,
    seed: u64,
) -> Result<Vec<Scenario>, ScenarioError> {
    if n_scenarios == 0 || horizon == 0 {
        return Err(ScenarioError::InvalidArgument(
            "need at least one scenario and one hour".into(),
        ));
    }
    let prob = 1.0 / n_scenarios as f64;
    Ok((0..n_scenarios)
        .map(|s| {
            let mut rng = substream(seed, 100, s as u64);
            let wind = sample_wind_params(case, &mut rng);
            let z = sample_z(&mut rng);
            let wind_mw = vec![wind.realize(z); horizon];
            let load_multiplier = (0..horizon)
                .map(|_| sample_load_multipliers(case.num_buses(), &mut rng))
                .collect();
            Scenario {
                probability: prob,
                z_value: z,
                wind,
                wind_mw,
                load_multiplier,
            }
        })
        .collect())
}
