//! Monte-Carlo model of the lifetime measurement: prepare, expose, check for
//! decay at every bin boundary.
//!
//! Each trial draws an exponential decay time with rate Γ_total by inverse
//! transform of a ChaCha8 uniform. The generator for trial `k` is seeded with
//! the configuration seed and switched to stream `k`, so results do not
//! depend on the thread count. Detection is perfect and decay is absorbing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::atomdata::{HyperfineState, SpeciesData};
use crate::error::{Error, Result};
use crate::fitting::{SurvivalCurve, SurvivalRecord};
use crate::scattering::{scattering_report, FinalSelector, LaserDrive, Model, ScatterConfig};

/// Name of the random generator, recorded alongside simulated data.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), seed = config seed, stream = trial index";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SequenceConfig {
    /// Γ_total in 1/s.
    pub total_rate: f64,
    /// Interval between detections, seconds.
    pub bin: f64,
    pub max_bins: usize,
    pub trials: u64,
    pub seed: u64,
}

impl SequenceConfig {
    /// 100 ms bins, 50 bins, 10⁴ trials, seed 0.
    pub fn new(total_rate: f64) -> Self {
        SequenceConfig {
            total_rate,
            bin: 0.1,
            max_bins: 50,
            trials: 10_000,
            seed: 0,
        }
    }

    pub fn with_bin(mut self, bin: f64) -> Self {
        self.bin = bin;
        self
    }

    pub fn with_max_bins(mut self, max_bins: usize) -> Self {
        self.max_bins = max_bins;
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_rate >= 0.0) || !self.total_rate.is_finite() {
            return Err(Error::InvalidArgument(format!("total rate must be >= 0, got {}", self.total_rate)));
        }
        if !(self.bin > 0.0) || !self.bin.is_finite() {
            return Err(Error::InvalidArgument(format!("bin must be > 0, got {}", self.bin)));
        }
        if self.max_bins == 0 || self.trials == 0 {
            return Err(Error::InvalidArgument("max bins and trials must be positive".into()));
        }
        Ok(())
    }
}

/// Number of detection checks (at bin, 2·bin, …) trial `k` survives.
fn bins_survived(cfg: &SequenceConfig, k: u64) -> usize {
    if cfg.total_rate == 0.0 {
        return cfg.max_bins;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(k);
    let u: f64 = rng.random();
    // 1 − u lies in (0, 1]
    let t = -(1.0 - u).ln() / cfg.total_rate;
    let mut n = (t / cfg.bin).floor() as usize;
    if n >= 1 && (n as f64) * cfg.bin >= t {
        n -= 1;
    }
    n.min(cfg.max_bins)
}

/// Simulated survival counts at every bin boundary.
pub fn simulate_survival(cfg: &SequenceConfig) -> Result<SurvivalCurve> {
    cfg.validate()?;
    let hist = (0..cfg.trials)
        .into_par_iter()
        .fold(
            || vec![0u64; cfg.max_bins + 1],
            |mut h, k| {
                h[bins_survived(cfg, k)] += 1;
                h
            },
        )
        .reduce(
            || vec![0u64; cfg.max_bins + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    // survivors at check n = trials surviving at least n checks
    let mut survivors = cfg.trials;
    let mut records = Vec::with_capacity(cfg.max_bins);
    for n in 1..=cfg.max_bins {
        survivors -= hist[n - 1];
        records.push(SurvivalRecord {
            delay: n as f64 * cfg.bin,
            trials: cfg.trials,
            survivors,
        });
    }
    SurvivalCurve::new(records)
}

/// Exposed and unexposed curves for one rate measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct Campaign {
    pub on: SurvivalCurve,
    pub off: SurvivalCurve,
    /// Scattering rate out of the initial level (1/s) used for `on`.
    pub srs_rate: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Simulates the exposed curve at Γ_srs + Γ_natural and the unexposed curve
/// at Γ_natural. Γ_srs is the Moore-model rate from `initial` into every
/// other level of the same parity. `config.total_rate` is ignored; the
/// unexposed curve uses a seed derived from `config.seed` by SplitMix64.
pub fn simulate_campaign(
    species: &SpeciesData,
    initial: &HyperfineState,
    drive: &LaserDrive,
    natural_rate: f64,
    config: &SequenceConfig,
    scatter: &ScatterConfig,
) -> Result<Campaign> {
    if !(natural_rate >= 0.0) || !natural_rate.is_finite() {
        return Err(Error::InvalidArgument(format!("natural rate must be >= 0, got {natural_rate}")));
    }
    let report = scattering_report(species, initial, drive, &FinalSelector::Leakage, scatter, Model::Moore)?;
    campaign_with_rate(report.total_rate(), natural_rate, config)
}

/// [`simulate_campaign`] with a given scattering rate.
pub fn campaign_with_rate(srs_rate: f64, natural_rate: f64, config: &SequenceConfig) -> Result<Campaign> {
    let on = SequenceConfig {
        total_rate: srs_rate + natural_rate,
        ..*config
    };
    let off = SequenceConfig {
        total_rate: natural_rate,
        seed: splitmix64(config.seed),
        ..*config
    };
    Ok(Campaign {
        on: simulate_survival(&on)?,
        off: simulate_survival(&off)?,
        srs_rate,
    })
}
