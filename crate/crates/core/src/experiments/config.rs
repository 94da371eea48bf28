//! Flat, typed run configuration.
//!
//! Every driver starts from its own preset (the reference workload for that experiment). A
//! TOML file overrides any subset of keys, and CLI flags override the file.
//! Unknown keys are rejected so typos never silently fall back to defaults.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::channel::{ArrayConfig, ArrayKind, GainModel};
use crate::crowding::ScalingPoint;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Driver {
    Cdf,
    BoundChain,
    GainMap,
    PowerSweep,
    Maxload,
    TuneAlpha,
}

impl Driver {
    pub fn name(&self) -> &'static str {
        match self {
            Driver::Cdf => "cdf",
            Driver::BoundChain => "bound-chain",
            Driver::GainMap => "gain-map",
            Driver::PowerSweep => "power-sweep",
            Driver::Maxload => "maxload",
            Driver::TuneAlpha => "tune-alpha",
        }
    }
}

impl fmt::Display for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathLoss {
    /// Free-space amplitude from the slant range.
    Friis,
    /// Unit gain for every user.
    Unit,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub altitude_km: f64,
    pub noise_density_dbm_hz: f64,
    pub path_loss: PathLoss,
    pub path_loss_exponent: f64,
    /// Transmit power, one value or a sweep.
    #[serde(deserialize_with = "one_or_many")]
    pub tx_power_dbm: Vec<f64>,
    pub array: ArrayKind,
    pub m_x: usize,
    pub m_y: usize,
    pub k_users: usize,
    pub l_snapshots: usize,
    /// Cell half-width, one value or a sweep.
    #[serde(deserialize_with = "one_or_many")]
    pub r_cell_km: Vec<f64>,
    /// Scheduling pool size.
    pub u_candidates: usize,
    pub trials: usize,
    pub seed: u64,
    pub alpha_grid: Vec<f64>,
    /// Independent drops used to tune the selection threshold.
    pub tuning_trials: usize,
    /// Resolution cells spanned by the user support in the bound chain.
    pub bins: usize,
    /// Maximum loads swept by the bound chain.
    pub n_values: Vec<usize>,
    pub p_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    /// Scaling exponents for the load study; `r` also sets the gain-map cell size.
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub m_list: Vec<usize>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl ExperimentConfig {
    /// Shared physical setup: 1.9925 GHz carrier, 5 MHz bandwidth, 600 km
    /// altitude, -174 dBm/Hz noise density, free-space path loss.
    fn base() -> Self {
        Self {
            carrier_hz: 1.9925e9,
            bandwidth_hz: 5e6,
            altitude_km: 600.0,
            noise_density_dbm_hz: -174.0,
            path_loss: PathLoss::Friis,
            path_loss_exponent: 2.0,
            tx_power_dbm: vec![40.0],
            array: ArrayKind::Upa,
            m_x: 16,
            m_y: 16,
            k_users: 16,
            l_snapshots: 3,
            r_cell_km: vec![60.0],
            u_candidates: 256,
            trials: 1000,
            seed: 1,
            alpha_grid: (1..=10).map(|i| i as f64 / 10.0).collect(),
            tuning_trials: 100,
            bins: 16,
            n_values: (2..=6).collect(),
            p_grid: linspace(0.1, 0.9, 6),
            q_grid: linspace(0.0, 0.8, 6),
            p: 0.9,
            q: 0.0,
            r: 0.5,
            m_list: vec![1 << 8, 1 << 10, 1 << 12, 1 << 14],
        }
    }

    /// Defaults of each driver.
    pub fn preset(driver: Driver) -> Self {
        let base = Self::base();
        match driver {
            Driver::Cdf => Self {
                r_cell_km: vec![60.0, 90.0, 120.0],
                ..base
            },
            Driver::BoundChain => Self {
                array: ArrayKind::Ula,
                m_x: 256,
                m_y: 1,
                l_snapshots: 1,
                tx_power_dbm: vec![30.0],
                trials: 500,
                ..base
            },
            Driver::GainMap => Self {
                array: ArrayKind::Ula,
                m_x: 256,
                m_y: 1,
                r: 0.6,
                trials: 200,
                ..base
            },
            Driver::PowerSweep | Driver::TuneAlpha => Self {
                tx_power_dbm: (0..7).map(|i| 30.0 + 5.0 * i as f64).collect(),
                trials: 500,
                ..base
            },
            Driver::Maxload => Self {
                array: ArrayKind::Ula,
                m_x: 256,
                m_y: 1,
                l_snapshots: 1,
                trials: 200,
                ..base
            },
        }
    }

    /// Preset overlaid with the keys of a TOML document.
    pub fn from_toml(driver: Driver, text: &str) -> Result<Self> {
        let overrides: toml::Table = text.parse().map_err(|e| Error::Config(format!("invalid TOML: {e}")))?;
        let mut merged = toml::Table::try_from(Self::preset(driver)).map_err(|e| Error::Config(e.to_string()))?;
        for (key, value) in overrides {
            if !merged.contains_key(&key) {
                return Err(Error::Config(format!("unknown configuration key `{key}`")));
            }
            merged.insert(key, value);
        }
        let cfg: Self = merged.try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        Ok(cfg)
    }

    /// Preset, optionally overlaid with a TOML file.
    pub fn load(driver: Driver, path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::preset(driver)),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
                Self::from_toml(driver, &text)
            }
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Noise power `N0 + 10 log10(B)` in dBm.
    pub fn noise_power_dbm(&self) -> f64 {
        self.noise_density_dbm_hz + 10.0 * self.bandwidth_hz.log10()
    }

    /// Linear SNR `10^{(P - σ²)/10}` for a transmit power in dBm.
    pub fn rho(&self, tx_power_dbm: f64) -> f64 {
        10f64.powf((tx_power_dbm - self.noise_power_dbm()) / 10.0)
    }

    pub fn array_config(&self) -> Result<ArrayConfig> {
        ArrayConfig::new(self.array, self.m_x, self.m_y)
    }

    pub fn gain_model(&self) -> GainModel {
        match self.path_loss {
            PathLoss::Friis => GainModel::Friis {
                carrier_hz: self.carrier_hz,
                exponent: self.path_loss_exponent,
            },
            PathLoss::Unit => GainModel::Unit,
        }
    }

    pub fn scaling_point(&self) -> Result<ScalingPoint> {
        ScalingPoint::new(self.p, self.q, self.r, self.array).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks the invariants every driver relies on, plus driver-specific ones.
    pub fn validate(&self, driver: Driver) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        for (name, v) in [
            ("carrier_hz", self.carrier_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("altitude_km", self.altitude_km),
            ("path_loss_exponent", self.path_loss_exponent),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.r_cell_km.is_empty() || self.r_cell_km.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return bad("r_cell_km must be a nonempty list of positive values".into());
        }
        if self.tx_power_dbm.is_empty() || self.tx_power_dbm.iter().any(|p| !p.is_finite()) {
            return bad("tx_power_dbm must be a nonempty list of finite values".into());
        }
        if self.k_users == 0 || self.l_snapshots == 0 {
            return bad("k_users and l_snapshots must be >= 1".into());
        }
        self.array_config().map_err(|e| Error::Config(e.to_string()))?;
        if self.alpha_grid.is_empty() || self.alpha_grid.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
            return bad("alpha_grid must be a nonempty list in (0, 1]".into());
        }
        match driver {
            Driver::BoundChain => {
                if self.array != ArrayKind::Ula {
                    return bad("bound-chain needs array = \"ula\"".into());
                }
                if self.n_values.is_empty() {
                    return bad("n_values must not be empty".into());
                }
            }
            Driver::GainMap => {
                if self.array != ArrayKind::Ula {
                    return bad("gain-map needs array = \"ula\"".into());
                }
                if self.p_grid.is_empty() || self.q_grid.is_empty() {
                    return bad("p_grid and q_grid must not be empty".into());
                }
                for &p in &self.p_grid {
                    for &q in &self.q_grid {
                        ScalingPoint::new(p, q, self.r, self.array).map_err(|e| Error::Config(e.to_string()))?;
                    }
                }
            }
            Driver::PowerSweep | Driver::TuneAlpha => {
                if self.u_candidates < self.k_users {
                    return bad(format!("u_candidates ({}) must be >= k_users ({})", self.u_candidates, self.k_users));
                }
                if self.tuning_trials == 0 {
                    return bad("tuning_trials must be >= 1".into());
                }
            }
            Driver::Maxload => {
                self.scaling_point()?;
                if self.m_list.len() < 2 || self.m_list.windows(2).any(|w| w[0] >= w[1]) || self.m_list[0] < 2 {
                    return bad("m_list needs at least two strictly increasing sizes >= 2".into());
                }
            }
            Driver::Cdf => {}
        }
        Ok(())
    }
}
