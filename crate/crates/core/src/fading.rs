//! Reproducible channel realizations.
//!
//! Draws use ChaCha8 (`rand_chacha` 0.9, pinned exactly in the manifest) so a
//! seed produces the same gains on every platform. Per-trial seeds are derived
//! from a base seed and trial coordinates with the SplitMix64 finalizer.

use std::fmt;
use std::str::FromStr;

use rand::distr::{Distribution, Open01, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{ChannelGains, SimConfig};
use crate::{Error, Result};

/// How per-entry fading amplitudes are distributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FadingModel {
    /// Uniform in decibels over `[fading_db_min, fading_db_max]`.
    #[default]
    UniformDb,
    /// Rayleigh magnitudes whose median sits at the midpoint of the dB range.
    Rayleigh,
}

impl FadingModel {
    pub fn label(self) -> &'static str {
        match self {
            Self::UniformDb => "uniform-db",
            Self::Rayleigh => "rayleigh",
        }
    }
}

impl fmt::Display for FadingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FadingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-db" => Ok(Self::UniformDb),
            "rayleigh" => Ok(Self::Rayleigh),
            other => Err(Error::usage(format!(
                "unknown fading model `{other}` (expected uniform-db or rayleigh)"
            ))),
        }
    }
}

/// Whether the dB bounds describe amplitude (x/20) or power (x/10) ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DbConvention {
    #[default]
    Amplitude,
    Power,
}

impl DbConvention {
    pub fn label(self) -> &'static str {
        match self {
            Self::Amplitude => "amplitude",
            Self::Power => "power",
        }
    }

    /// Linear amplitude for a decibel value under this convention.
    pub fn to_amplitude(self, db: f64) -> f64 {
        match self {
            Self::Amplitude => db_to_amplitude(db),
            Self::Power => 10f64.powf(db / 10.0),
        }
    }
}

impl fmt::Display for DbConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DbConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amplitude" => Ok(Self::Amplitude),
            "power" => Ok(Self::Power),
            other => Err(Error::usage(format!(
                "unknown dB convention `{other}` (expected amplitude or power)"
            ))),
        }
    }
}

/// `10^(x/20)`.
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// SplitMix64 output function.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of indices into a base seed.
///
/// Distinct coordinate tuples give unrelated seeds; the mapping is fixed.
pub fn derive_seed(base: u64, coordinates: &[u64]) -> u64 {
    coordinates
        .iter()
        .fold(mix64(base), |acc, &c| mix64(acc ^ mix64(c)))
}

/// Seeded source of channel realizations, owned by one trial.
#[derive(Debug, Clone)]
pub struct SeededGenerator {
    seed: u64,
    rng: ChaCha8Rng,
}

impl SeededGenerator {
    pub fn new(seed: u64) -> Self {
        SeededGenerator {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 32-bit words consumed so far.
    pub fn stream_position(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub(crate) fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Draws one independent amplitude per (user, group, subcarrier).
///
/// Entries are filled user-major, then group, then subcarrier.
pub fn sample_channel_gains(cfg: &SimConfig, gen: &mut SeededGenerator) -> Result<ChannelGains> {
    cfg.validate()?;
    let (users, groups, subcarriers) = (cfg.n_users, cfg.n_groups, cfg.subcarriers_per_group());
    let n = users * groups * subcarriers;
    let convention = cfg.db_convention;
    let data: Vec<f64> = match cfg.fading_model {
        FadingModel::UniformDb => {
            let dist = Uniform::new_inclusive(cfg.fading_db_min, cfg.fading_db_max)
                .map_err(|e| Error::Validation(format!("fading range: {e}")))?;
            (0..n)
                .map(|_| convention.to_amplitude(dist.sample(gen.rng())))
                .collect()
        }
        FadingModel::Rayleigh => {
            let mid = convention.to_amplitude(0.5 * (cfg.fading_db_min + cfg.fading_db_max));
            // Rayleigh median is sigma * sqrt(2 ln 2)
            let sigma = mid / (2.0 * std::f64::consts::LN_2).sqrt();
            (0..n)
                .map(|_| {
                    let u: f64 = Open01.sample(gen.rng());
                    sigma * (-2.0 * u.ln()).sqrt()
                })
                .collect()
        }
    };
    ChannelGains::new(users, groups, subcarriers, data)
}
