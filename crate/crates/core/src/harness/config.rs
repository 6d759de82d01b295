use std::f64::consts::FRAC_PI_3;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::pbs::{BoundMode, OfdmConfig};
use crate::sched::BeamLimits;
use crate::{ArrayConfig, Error, Result};

/// Named starting points for a [`ScenarioConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 30 GHz, M=32, K=8, U=4: small enough for every check to run quickly.
    Desk,
    /// 300 GHz, M=32, K=16, with `ν_u·T_us ≈ 0.5`.
    Mobility,
    /// 30 GHz, M=128, K=32, U=20.
    #[serde(rename = "table2-30ghz")]
    Table2At30Ghz,
    /// 300 GHz, M=256, K=128, U=20.
    #[serde(rename = "table2-300ghz")]
    Table2At300Ghz,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Desk, Preset::Mobility, Preset::Table2At30Ghz, Preset::Table2At300Ghz];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Desk => "desk",
            Preset::Mobility => "mobility",
            Preset::Table2At30Ghz => "table2-30ghz",
            Preset::Table2At300Ghz => "table2-300ghz",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown preset {name:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub carrier_freq_hz: f64,
    pub num_bs_antennas: usize,
    pub num_ut_antennas: usize,
    pub num_uts: usize,

    pub num_subcarriers: usize,
    pub cp_samples: usize,
    pub sample_interval_s: f64,

    pub num_clusters: usize,
    pub subpaths_per_cluster: usize,
    /// RMS delay spread of each UT's ray set.
    pub delay_spread_s: f64,
    /// RMS angle spread of the subpaths around their cluster mean.
    pub angle_spread_rad: f64,
    /// Cluster mean AoDs are uniform on `[-aod_sector_rad, aod_sector_rad]`.
    pub aod_sector_rad: f64,
    /// Power decay from one cluster to the next, in dB.
    pub cluster_decay_db: f64,
    pub velocity_mps: f64,

    pub snr_grid_db: Vec<f64>,
    /// Realizations per rate evaluation inside the scheduler.
    pub schedule_trials: usize,
    /// Realizations for reported rates.
    pub rate_trials: usize,
    /// Random-phase trials for the statistical property checks.
    pub prop_trials: usize,
    pub link_frames: usize,
    /// Minimum number of data bits per link-level SNR point.
    pub link_min_bits: u64,
    pub link_max_streams: usize,

    pub bs_beams_per_ut: usize,
    pub ut_beams_per_ut: usize,
    pub bs_beams_total: usize,

    pub bound_mode: BoundMode,
    pub master_seed: u64,
}

impl ScenarioConfig {
    pub fn preset(preset: Preset) -> Self {
        let ofdm = OfdmConfig::table2();
        let base = ScenarioConfig {
            carrier_freq_hz: 30e9,
            num_bs_antennas: 32,
            num_ut_antennas: 8,
            num_uts: 4,
            num_subcarriers: ofdm.num_subcarriers,
            cp_samples: ofdm.cp_samples,
            sample_interval_s: ofdm.sample_interval_s,
            num_clusters: 4,
            subpaths_per_cluster: 20,
            delay_spread_s: 1388.4e-9,
            angle_spread_rad: 2f64.to_radians(),
            aod_sector_rad: FRAC_PI_3,
            cluster_decay_db: 3.0,
            velocity_mps: 30.0,
            snr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            schedule_trials: 200,
            rate_trials: 2000,
            prop_trials: 10_000,
            link_frames: 2,
            link_min_bits: 100_000,
            link_max_streams: 4,
            bs_beams_per_ut: 8,
            ut_beams_per_ut: 8,
            bs_beams_total: 32,
            bound_mode: BoundMode::Analytic,
            master_seed: 20_240_601,
        };
        match preset {
            Preset::Desk => base,
            Preset::Mobility => ScenarioConfig {
                carrier_freq_hz: 300e9,
                num_ut_antennas: 16,
                // ν_u·T_us = 0.5 at 300 GHz with 2048 × 6.51 ns symbols
                velocity_mps: 0.5 / (2048.0 * 6.51e-9) * crate::SPEED_OF_LIGHT / 300e9,
                ut_beams_per_ut: 16,
                ..base
            },
            Preset::Table2At30Ghz => ScenarioConfig {
                num_bs_antennas: 128,
                num_ut_antennas: 32,
                num_uts: 20,
                bs_beams_per_ut: 16,
                ut_beams_per_ut: 32,
                bs_beams_total: 128,
                ..base
            },
            Preset::Table2At300Ghz => ScenarioConfig {
                carrier_freq_hz: 300e9,
                num_bs_antennas: 256,
                num_ut_antennas: 128,
                num_uts: 20,
                bs_beams_per_ut: 16,
                ut_beams_per_ut: 128,
                bs_beams_total: 256,
                ..base
            },
        }
    }

    /// Parses a flat TOML document. An optional `preset = "<name>"` key selects
    /// the defaults that the remaining keys override; without it every field
    /// must be present.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Self::from_table(table, &[])
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Like [`ScenarioConfig::from_toml_str`], then applies `key=value`
    /// overrides. Values are TOML literals; bare words are taken as strings.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Self::from_table(table, overrides)
    }

    fn from_table(mut table: toml::Table, overrides: &[String]) -> Result<Self> {
        let mut parsed = Vec::with_capacity(overrides.len());
        for o in overrides {
            let (key, value) =
                o.split_once('=').ok_or_else(|| Error::Config(format!("override {o:?} is not key=value")))?;
            let (key, value) = (key.trim(), value.trim());
            let value = match format!("v = {value}").parse::<toml::Table>() {
                Ok(mut t) => t.remove("v").expect("parsed key"),
                Err(_) => toml::Value::String(value.to_string()),
            };
            parsed.push((key.to_string(), value));
        }
        let preset = parsed
            .iter()
            .rev()
            .find(|(k, _)| k == "preset")
            .map(|(_, v)| v.clone())
            .or_else(|| table.remove("preset"));
        let mut merged = match preset {
            Some(toml::Value::String(name)) => toml::Table::try_from(Self::preset(Preset::from_name(&name)?))
                .map_err(|e| Error::Config(e.to_string()))?,
            Some(other) => return Err(Error::Config(format!("preset must be a string, got {other}"))),
            None => toml::Table::new(),
        };
        table.remove("preset");
        merged.extend(table);
        for (k, v) in parsed.into_iter().filter(|(k, _)| k != "preset") {
            merged.insert(k, v);
        }
        let cfg: ScenarioConfig =
            toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let positive_counts = [
            ("num_bs_antennas", self.num_bs_antennas),
            ("num_ut_antennas", self.num_ut_antennas),
            ("num_uts", self.num_uts),
            ("num_subcarriers", self.num_subcarriers),
            ("num_clusters", self.num_clusters),
            ("subpaths_per_cluster", self.subpaths_per_cluster),
            ("schedule_trials", self.schedule_trials),
            ("rate_trials", self.rate_trials),
            ("prop_trials", self.prop_trials),
            ("link_frames", self.link_frames),
            ("link_max_streams", self.link_max_streams),
        ];
        if let Some((name, _)) = positive_counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        let positive_reals = [
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("sample_interval_s", self.sample_interval_s),
        ];
        if let Some((name, v)) = positive_reals.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config(format!("{name} must be positive, got {v}")));
        }
        let nonneg = [
            ("delay_spread_s", self.delay_spread_s),
            ("angle_spread_rad", self.angle_spread_rad),
            ("cluster_decay_db", self.cluster_decay_db),
            ("velocity_mps", self.velocity_mps),
        ];
        if let Some((name, v)) = nonneg.iter().find(|(_, v)| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.aod_sector_rad) {
            return Err(Error::Config(format!("aod_sector_rad must lie in [0, π/2], got {}", self.aod_sector_rad)));
        }
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_grid_db must be a non-empty list of finite values".into()));
        }
        Ok(())
    }

    pub fn array(&self) -> ArrayConfig {
        ArrayConfig { num_bs_antennas: self.num_bs_antennas, num_ut_antennas: self.num_ut_antennas }
    }

    pub fn ofdm(&self) -> OfdmConfig {
        OfdmConfig {
            num_subcarriers: self.num_subcarriers,
            cp_samples: self.cp_samples,
            sample_interval_s: self.sample_interval_s,
        }
    }

    pub fn limits(&self) -> BeamLimits {
        BeamLimits::uniform(self.num_uts, self.bs_beams_per_ut, self.ut_beams_per_ut, self.bs_beams_total)
    }

    pub fn max_doppler_hz(&self) -> f64 {
        self.carrier_freq_hz * self.velocity_mps / crate::SPEED_OF_LIGHT
    }

    /// First 16 hex digits of the SHA-256 of the JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))[..16].to_string()
    }
}
