//! Joint and per-beam synchronization (PBS) in time and frequency.
//!
//! Each receive beam `k` of a UT sees time offsets in `[τ_min,k, τ_max,k]` and
//! Doppler offsets in `[ν_min,k, ν_max,k]`. Joint synchronization applies one
//! correction to every beam; PBS corrects every beam individually, which
//! shrinks the residual Doppler spread by a factor of `K`.

mod bounds;
mod effective;
mod plan;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use bounds::{offset_bounds, one_ring_bounds, one_ring_rays, BeamBounds, Interval, OffsetBounds};
pub use effective::{effective_channel_dl, effective_channel_ul};
pub use plan::{make_sync_plan, spreads, SpreadReport, SyncPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncMode {
    Joint,
    PerBeam,
}

impl SyncMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SyncMode::Joint => "joint",
            SyncMode::PerBeam => "per_beam",
        }
    }
}

/// How per-beam Doppler bounds are obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// Closed-form cell images `(2k/K - 1)·ν_u .. (2(k+1)/K - 1)·ν_u`.
    #[default]
    Analytic,
    /// Extrema of `ν_u·sin(aoa)` over the rays in each beam.
    Empirical,
}

impl BoundMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundMode::Analytic => "analytic",
            BoundMode::Empirical => "empirical",
        }
    }
}

/// OFDM numerology: `T_us = N_us·T_s`, `T_cp = N_cp·T_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OfdmConfig {
    pub num_subcarriers: usize,
    pub cp_samples: usize,
    pub sample_interval_s: f64,
}

impl OfdmConfig {
    pub fn new(num_subcarriers: usize, cp_samples: usize, sample_interval_s: f64) -> Result<Self> {
        if num_subcarriers == 0 {
            return Err(Error::Domain("number of subcarriers must be positive".into()));
        }
        if !(sample_interval_s > 0.0 && sample_interval_s.is_finite()) {
            return Err(Error::Domain(format!("sample interval must be positive, got {sample_interval_s}")));
        }
        Ok(Self { num_subcarriers, cp_samples, sample_interval_s })
    }

    /// 2048 subcarriers, 144-sample CP, 6.51 ns sampling (75 kHz spacing).
    pub fn table2() -> Self {
        Self { num_subcarriers: 2048, cp_samples: 144, sample_interval_s: 6.51e-9 }
    }

    /// Useful symbol length `T_us`.
    pub fn symbol_duration_s(&self) -> f64 {
        self.num_subcarriers as f64 * self.sample_interval_s
    }

    /// CP length `T_cp`.
    pub fn cp_duration_s(&self) -> f64 {
        self.cp_samples as f64 * self.sample_interval_s
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        1.0 / self.symbol_duration_s()
    }

    /// CP plus useful part, in samples.
    pub fn samples_per_symbol(&self) -> usize {
        self.num_subcarriers + self.cp_samples
    }

    /// Time of frame sample `i`. The useful part of the first symbol starts at
    /// `t = 0`, so its CP occupies `[-T_cp, 0)`.
    pub fn sample_time(&self, i: usize) -> f64 {
        (i as f64 - self.cp_samples as f64) * self.sample_interval_s
    }

    /// Nearest whole number of samples for a duration.
    pub fn samples_for(&self, duration_s: f64) -> usize {
        (duration_s / self.sample_interval_s).round().max(0.0) as usize
    }
}
