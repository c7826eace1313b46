//! Physical-layer quantities: SINR target, combining weights and the
//! per-channel transmit power a user needs on a subcarrier group.
//!
//! For a group of `S` subcarriers with real positive fading amplitudes `f_s`
//! and combining weights `w_s`, the power one code channel needs to reach the
//! SINR target `beta` at noise density `N0` is
//!
//! ```text
//! p = beta * N0 * S^-2 * (sum_s w_s^2) * (sum_s (w_s * f_s)^-2)
//! ```
//!
//! With the canonical weights this reduces to
//!
//! ```text
//! MRC (w = f):    beta * N0 * S^-2 * (sum f^2) * (sum f^-4)
//! EGC (w = 1):    beta * N0 * S^-1 * (sum f^-2)
//! ZFC (w = 1/f):  beta * N0 * S^-1 * (sum f^-2)
//! ```
//!
//! [`required_power`] evaluates the reduced forms; [`required_power_general`]
//! evaluates the weighted expression for arbitrary weights.

use std::fmt;
use std::str::FromStr;

use crate::fading::{DbConvention, FadingModel};
use crate::{Error, Result};

/// Receiver weighting across the subcarriers of a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CombiningScheme {
    /// Maximal ratio combining.
    Mrc,
    /// Equal gain combining.
    Egc,
    /// Zero forcing (channel inversion).
    Zfc,
}

impl CombiningScheme {
    pub const ALL: [CombiningScheme; 3] = [Self::Mrc, Self::Egc, Self::Zfc];

    pub fn label(self) -> &'static str {
        match self {
            Self::Mrc => "mrc",
            Self::Egc => "egc",
            Self::Zfc => "zfc",
        }
    }
}

impl fmt::Display for CombiningScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CombiningScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mrc" => Ok(Self::Mrc),
            "egc" => Ok(Self::Egc),
            "zfc" => Ok(Self::Zfc),
            other => Err(Error::usage(format!(
                "unknown combining scheme `{other}` (expected mrc, egc or zfc)"
            ))),
        }
    }
}

/// Simulation environment: system dimensions, link target and fading range.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Total number of code channels across all groups.
    pub n_channels: usize,
    pub n_groups: usize,
    pub n_users: usize,
    /// Target bit-error rate.
    pub ber: f64,
    /// Noise power spectral density in W/Hz.
    pub noise_psd: f64,
    pub fading_db_min: f64,
    pub fading_db_max: f64,
    pub fading_model: FadingModel,
    pub db_convention: DbConvention,
}

impl Default for SimConfig {
    /// 128 channels in 8 groups shared by 8 users, BER 1e-2, N0 = 0.16 W/Hz,
    /// fading uniform over 0-12 dB.
    fn default() -> Self {
        SimConfig {
            n_channels: 128,
            n_groups: 8,
            n_users: 8,
            ber: 1e-2,
            noise_psd: 0.16,
            fading_db_min: 0.0,
            fading_db_max: 12.0,
            fading_model: FadingModel::UniformDb,
            db_convention: DbConvention::Amplitude,
        }
    }
}

impl SimConfig {
    /// Number of subcarriers (and hence code channels) per group.
    ///
    /// Only meaningful once [`SimConfig::validate`] has passed.
    pub fn subcarriers_per_group(&self) -> usize {
        self.n_channels.checked_div(self.n_groups).unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_groups == 0 || self.n_users == 0 || self.n_channels == 0 {
            return Err(Error::Validation(format!(
                "n_channels, n_groups and n_users must be positive (got {}, {}, {})",
                self.n_channels, self.n_groups, self.n_users
            )));
        }
        if !self.n_channels.is_multiple_of(self.n_groups) {
            return Err(Error::Validation(format!(
                "n_channels = {} is not divisible by n_groups = {}",
                self.n_channels, self.n_groups
            )));
        }
        if !(self.ber > 0.0 && self.ber < 0.2) {
            return Err(Error::Validation(format!(
                "ber = {} must lie in (0, 0.2) for a positive SINR target",
                self.ber
            )));
        }
        if !(self.noise_psd > 0.0 && self.noise_psd.is_finite()) {
            return Err(Error::Validation(format!(
                "noise_psd = {} must be positive and finite",
                self.noise_psd
            )));
        }
        if !(self.fading_db_min.is_finite() && self.fading_db_max.is_finite()) {
            return Err(Error::Validation("fading bounds must be finite".into()));
        }
        if self.fading_db_min > self.fading_db_max {
            return Err(Error::Validation(format!(
                "fading_db_min = {} exceeds fading_db_max = {}",
                self.fading_db_min, self.fading_db_max
            )));
        }
        Ok(())
    }

    /// SINR target derived from the configured BER.
    pub fn beta(&self) -> Result<f64> {
        target_sinr(self.ber)
    }
}

/// SINR target `beta = -2 ln(5 * ber)`.
pub fn target_sinr(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber < 0.2) {
        return Err(Error::domain(format!(
            "ber = {ber} outside (0, 0.2); the SINR target would not be positive"
        )));
    }
    let beta = -2.0 * (5.0 * ber).ln();
    if beta > 0.0 {
        Ok(beta)
    } else {
        // 5 * ber rounds to 1.0 just below the upper bound
        Err(Error::domain(format!("ber = {ber} rounds to a zero SINR target")))
    }
}

fn check_gains(gains: &[f64]) -> Result<()> {
    if gains.is_empty() {
        return Err(Error::domain("gain vector is empty"));
    }
    if let Some((s, g)) = gains
        .iter()
        .enumerate()
        .find(|(_, g)| !(**g > 0.0 && g.is_finite()))
    {
        return Err(Error::domain(format!(
            "gain at subcarrier {s} is {g}; amplitudes must be positive and finite"
        )));
    }
    Ok(())
}

/// Per-subcarrier combining weights for real positive amplitudes.
pub fn combining_weights(gains: &[f64], scheme: CombiningScheme) -> Result<Vec<f64>> {
    check_gains(gains)?;
    Ok(match scheme {
        CombiningScheme::Mrc => gains.to_vec(),
        CombiningScheme::Egc => vec![1.0; gains.len()],
        CombiningScheme::Zfc => gains.iter().map(|f| 1.0 / f).collect(),
    })
}

fn check_link(beta: f64, noise_psd: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!("beta = {beta} must be positive and finite")));
    }
    if !(noise_psd > 0.0 && noise_psd.is_finite()) {
        return Err(Error::domain(format!(
            "noise_psd = {noise_psd} must be positive and finite"
        )));
    }
    Ok(())
}

fn finite_power(p: f64) -> Result<f64> {
    if p.is_finite() {
        Ok(p)
    } else {
        Err(Error::Range(format!("required power overflowed to {p}")))
    }
}

/// Power per code channel on one group, using the reduced per-scheme form.
///
/// EGC and ZFC share one code path, so their results are bit-identical.
pub fn required_power(
    gains: &[f64],
    scheme: CombiningScheme,
    beta: f64,
    noise_psd: f64,
) -> Result<f64> {
    check_gains(gains)?;
    check_link(beta, noise_psd)?;
    let s = gains.len() as f64;
    let shape = match scheme {
        CombiningScheme::Mrc => {
            let energy: f64 = gains.iter().map(|f| f * f).sum();
            let inv_fourth: f64 = gains.iter().map(|f| (f * f * f * f).recip()).sum();
            energy * inv_fourth / (s * s)
        }
        CombiningScheme::Egc | CombiningScheme::Zfc => {
            let inv_sq: f64 = gains.iter().map(|f| (f * f).recip()).sum();
            inv_sq / s
        }
    };
    finite_power(beta * noise_psd * shape)
}

/// Power per code channel for arbitrary positive combining weights.
pub fn required_power_general(
    gains: &[f64],
    weights: &[f64],
    beta: f64,
    noise_psd: f64,
) -> Result<f64> {
    check_gains(gains)?;
    check_link(beta, noise_psd)?;
    if weights.len() != gains.len() {
        return Err(Error::usage(format!(
            "{} weights for {} subcarriers",
            weights.len(),
            gains.len()
        )));
    }
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::domain("combining weights must be positive and finite"));
    }
    let s = gains.len() as f64;
    let weight_energy: f64 = weights.iter().map(|w| w * w).sum();
    let inv_combined: f64 = weights
        .iter()
        .zip(gains)
        .map(|(w, f)| {
            let wf = w * f;
            (wf * wf).recip()
        })
        .sum();
    finite_power(beta * noise_psd * (weight_energy * inv_combined / (s * s)))
}

/// Fading amplitudes indexed `[user][group][subcarrier]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGains {
    users: usize,
    groups: usize,
    subcarriers: usize,
    data: Vec<f64>,
}

impl ChannelGains {
    /// Wraps a flat buffer laid out user-major, then group, then subcarrier.
    pub fn new(users: usize, groups: usize, subcarriers: usize, data: Vec<f64>) -> Result<Self> {
        if users == 0 || groups == 0 || subcarriers == 0 {
            return Err(Error::usage("channel gain dimensions must be positive"));
        }
        if data.len() != users * groups * subcarriers {
            return Err(Error::usage(format!(
                "expected {users}x{groups}x{subcarriers} = {} gains, got {}",
                users * groups * subcarriers,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|g| !(*g > 0.0 && g.is_finite())) {
            let per_user = groups * subcarriers;
            return Err(Error::domain(format!(
                "gain [{}][{}][{}] = {} is not positive and finite",
                i / per_user,
                (i % per_user) / subcarriers,
                i % subcarriers,
                data[i]
            )));
        }
        Ok(ChannelGains {
            users,
            groups,
            subcarriers,
            data,
        })
    }

    /// Same amplitude on every entry.
    pub fn flat(users: usize, groups: usize, subcarriers: usize, value: f64) -> Result<Self> {
        Self::new(users, groups, subcarriers, vec![value; users * groups * subcarriers])
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    /// Amplitudes of `user` across the subcarriers of `group`.
    pub fn group(&self, user: usize, group: usize) -> &[f64] {
        let start = (user * self.groups + group) * self.subcarriers;
        &self.data[start..start + self.subcarriers]
    }

    pub fn get(&self, user: usize, group: usize, subcarrier: usize) -> f64 {
        self.group(user, group)[subcarrier]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Every amplitude multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(
            self.users,
            self.groups,
            self.subcarriers,
            self.data.iter().map(|g| g * alpha).collect(),
        )
    }
}

/// Link parameters a [`PowerMatrix`] was computed with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOrigin {
    pub scheme: CombiningScheme,
    pub beta: f64,
    pub noise_psd: f64,
}

/// Required per-channel power, indexed `[group][user]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMatrix {
    groups: usize,
    users: usize,
    data: Vec<f64>,
    origin: Option<PowerOrigin>,
}

impl PowerMatrix {
    /// Builds a matrix directly from per-group rows, e.g. for hand-made fixtures.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let groups = rows.len();
        let users = rows.first().map_or(0, Vec::len);
        if groups == 0 || users == 0 {
            return Err(Error::usage("power matrix must have at least one group and one user"));
        }
        if rows.iter().any(|r| r.len() != users) {
            return Err(Error::usage("power matrix rows differ in length"));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        if let Some(i) = data.iter().position(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::domain(format!(
                "power [{}][{}] = {} is not positive and finite",
                i / users,
                i % users,
                data[i]
            )));
        }
        Ok(PowerMatrix {
            groups,
            users,
            data,
            origin: None,
        })
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn get(&self, group: usize, user: usize) -> f64 {
        self.data[group * self.users + user]
    }

    pub fn row(&self, group: usize) -> &[f64] {
        &self.data[group * self.users..(group + 1) * self.users]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn origin(&self) -> Option<PowerOrigin> {
        self.origin
    }

    pub fn scheme(&self) -> Option<CombiningScheme> {
        self.origin.map(|o| o.scheme)
    }
}

/// Evaluates [`required_power`] for every (group, user) pair.
pub fn build_power_matrix(
    gains: &ChannelGains,
    scheme: CombiningScheme,
    beta: f64,
    noise_psd: f64,
) -> Result<PowerMatrix> {
    let (groups, users) = (gains.groups(), gains.users());
    let mut data = Vec::with_capacity(groups * users);
    for group in 0..groups {
        for user in 0..users {
            let p = required_power(gains.group(user, group), scheme, beta, noise_psd).map_err(
                |e| Error::PowerEntry {
                    group,
                    user,
                    source: Box::new(e),
                },
            )?;
            data.push(p);
        }
    }
    Ok(PowerMatrix {
        groups,
        users,
        data,
        origin: Some(PowerOrigin {
            scheme,
            beta,
            noise_psd,
        }),
    })
}
