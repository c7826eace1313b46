//! Flat key-value experiment configuration.
//!
//! The document is TOML restricted to top-level scalar keys. Every key is
//! optional; omitted keys take the defaults printed by [`default_config_text`].

use crate::allocation::Algorithm;
use crate::fading::{DbConvention, FadingModel};
use crate::model::{CombiningScheme, SimConfig};
use crate::oracle::Family;
use crate::{Error, Result};

/// Everything a sweep, comparison or oracle check needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sim: SimConfig,
    /// Budget grid in dBW, ascending.
    pub pmax_dbw: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<CombiningScheme>,
    pub algorithms: Vec<Algorithm>,
    /// Reuse one channel realization per trial across the whole budget grid.
    pub common_random_numbers: bool,
    pub oracle_family: Family,
}

pub const DEFAULT_PMAX_START_DBW: f64 = -20.0;
pub const DEFAULT_PMAX_STOP_DBW: f64 = 30.0;
pub const DEFAULT_PMAX_STEP_DB: f64 = 2.0;

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sim: SimConfig::default(),
            pmax_dbw: budget_grid(
                DEFAULT_PMAX_START_DBW,
                DEFAULT_PMAX_STOP_DBW,
                DEFAULT_PMAX_STEP_DB,
            )
            .expect("default grid is valid"),
            trials: 100,
            seed: 1,
            schemes: CombiningScheme::ALL.to_vec(),
            algorithms: Algorithm::BOTH.to_vec(),
            common_random_numbers: false,
            oracle_family: Family::Matching,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.pmax_dbw.is_empty() {
            return Err(Error::Validation("budget grid is empty".into()));
        }
        if self.pmax_dbw.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("budget grid contains a non-finite value".into()));
        }
        if self.trials == 0 {
            return Err(Error::Validation("trials must be at least 1".into()));
        }
        if self.schemes.is_empty() || self.algorithms.is_empty() {
            return Err(Error::Validation("at least one scheme and one algorithm required".into()));
        }
        Ok(())
    }
}

/// `start, start + step, ...` up to and including `stop`.
pub fn budget_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::Validation("budget sweep bounds must be finite".into()));
    }
    if step <= 0.0 {
        return Err(Error::Validation(format!("budget step {step} must be positive")));
    }
    if stop < start {
        return Err(Error::Validation(format!("budget stop {stop} is below start {start}")));
    }
    // tolerate the rounding in (stop - start) / step for grids like -20..20 in 40/19
    let intervals = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=intervals).map(|i| start + i as f64 * step).collect())
}

/// `mrc`, `egc`, `zfc` or `all`.
pub fn parse_scheme_set(s: &str) -> Result<Vec<CombiningScheme>> {
    if s.eq_ignore_ascii_case("all") {
        Ok(CombiningScheme::ALL.to_vec())
    } else {
        Ok(vec![s.parse()?])
    }
}

/// `original`, `improved` or `both`.
pub fn parse_algorithm_set(s: &str) -> Result<Vec<Algorithm>> {
    if s.eq_ignore_ascii_case("both") {
        Ok(Algorithm::BOTH.to_vec())
    } else {
        Ok(vec![s.parse()?])
    }
}

fn parse_family(s: &str) -> Result<Family> {
    match s {
        "matching" => Ok(Family::Matching),
        "relaxed" => Ok(Family::Relaxed),
        other => Err(Error::usage(format!(
            "unknown oracle family `{other}` (expected matching or relaxed)"
        ))),
    }
}

fn as_count(key: &str, v: &toml::Value) -> Result<usize> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        toml::Value::Integer(i) => Err(Error::config(key, format!("{i} is negative"))),
        other => Err(Error::config(key, format!("expected an integer, found {}", other.type_str()))),
    }
}

fn as_real(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(Error::config(key, format!("expected a number, found {}", other.type_str()))),
    }
}

fn as_str<'a>(key: &str, v: &'a toml::Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::config(key, format!("expected a string, found {}", v.type_str())))
}

fn as_bool(key: &str, v: &toml::Value) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| Error::config(key, format!("expected true or false, found {}", v.type_str())))
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::ConfigSyntax(e.message().to_owned()))?;

    let mut cfg = ExperimentConfig::default();
    let mut start = DEFAULT_PMAX_START_DBW;
    let mut stop = DEFAULT_PMAX_STOP_DBW;
    let mut step = DEFAULT_PMAX_STEP_DB;

    for (key, value) in &table {
        let k = key.as_str();
        // wrap string-valued parse errors so they name the key
        let named = |e: Error| match e {
            Error::Usage(m) => Error::config(k, m),
            other => other,
        };
        match k {
            "n_channels" => cfg.sim.n_channels = as_count(k, value)?,
            "n_groups" => cfg.sim.n_groups = as_count(k, value)?,
            "n_users" => cfg.sim.n_users = as_count(k, value)?,
            "ber" => cfg.sim.ber = as_real(k, value)?,
            "noise_psd" => cfg.sim.noise_psd = as_real(k, value)?,
            "fading_db_min" => cfg.sim.fading_db_min = as_real(k, value)?,
            "fading_db_max" => cfg.sim.fading_db_max = as_real(k, value)?,
            "fading_model" => {
                cfg.sim.fading_model = as_str(k, value)?.parse::<FadingModel>().map_err(named)?
            }
            "db_convention" => {
                cfg.sim.db_convention = as_str(k, value)?.parse::<DbConvention>().map_err(named)?
            }
            "pmax_dbw_start" => start = as_real(k, value)?,
            "pmax_dbw_stop" => stop = as_real(k, value)?,
            "pmax_dbw_step" => step = as_real(k, value)?,
            "trials" => cfg.trials = as_count(k, value)?,
            "seed" => cfg.seed = as_count(k, value)? as u64,
            "scheme" => cfg.schemes = parse_scheme_set(as_str(k, value)?).map_err(named)?,
            "algorithm" => cfg.algorithms = parse_algorithm_set(as_str(k, value)?).map_err(named)?,
            "common_random_numbers" => cfg.common_random_numbers = as_bool(k, value)?,
            "oracle_family" => cfg.oracle_family = parse_family(as_str(k, value)?).map_err(named)?,
            _ => return Err(Error::config(k, "unknown key")),
        }
    }
    cfg.pmax_dbw = budget_grid(start, stop, step)?;
    cfg.validate()?;
    Ok(cfg)
}

/// The default configuration as a commented document.
pub fn default_config_text() -> String {
    let d = ExperimentConfig::default();
    let s = &d.sim;
    format!(
        "\
# MC-CDMA allocation experiment

# system dimensions; n_channels must be a multiple of n_groups
n_channels = {}
n_groups = {}
n_users = {}

# link target and noise (W/Hz)
ber = {:?}
noise_psd = {:?}

# fading amplitudes; fading_model = uniform-db | rayleigh, db_convention = amplitude | power
fading_db_min = {:?}
fading_db_max = {:?}
fading_model = \"{}\"
db_convention = \"{}\"

# budget grid in dBW (inclusive)
pmax_dbw_start = {:?}
pmax_dbw_stop = {:?}
pmax_dbw_step = {:?}

trials = {}
seed = {}
scheme = \"all\"
algorithm = \"both\"
common_random_numbers = {}
oracle_family = \"matching\"
",
        s.n_channels,
        s.n_groups,
        s.n_users,
        s.ber,
        s.noise_psd,
        s.fading_db_min,
        s.fading_db_max,
        s.fading_model,
        s.db_convention,
        DEFAULT_PMAX_START_DBW,
        DEFAULT_PMAX_STOP_DBW,
        DEFAULT_PMAX_STEP_DB,
        d.trials,
        d.seed,
        d.common_random_numbers,
    )
}
