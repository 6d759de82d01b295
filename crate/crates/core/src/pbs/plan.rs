use serde::{Deserialize, Serialize};

use super::{BoundMode, OffsetBounds, SyncMode};
use crate::{Error, Result};

/// Time and frequency corrections applied at a UT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SyncPlan {
    Joint { tau_syn_s: f64, nu_syn_hz: f64 },
    PerBeam { tau_syn_s: Vec<f64>, nu_syn_hz: Vec<f64> },
}

impl SyncPlan {
    pub fn mode(&self) -> SyncMode {
        match self {
            SyncPlan::Joint { .. } => SyncMode::Joint,
            SyncPlan::PerBeam { .. } => SyncMode::PerBeam,
        }
    }

    /// Time correction applied to beam `k`.
    pub fn tau_for(&self, k: usize) -> f64 {
        match self {
            SyncPlan::Joint { tau_syn_s, .. } => *tau_syn_s,
            SyncPlan::PerBeam { tau_syn_s, .. } => tau_syn_s[k],
        }
    }

    /// Frequency correction applied to beam `k`.
    pub fn nu_for(&self, k: usize) -> f64 {
        match self {
            SyncPlan::Joint { nu_syn_hz, .. } => *nu_syn_hz,
            SyncPlan::PerBeam { nu_syn_hz, .. } => nu_syn_hz[k],
        }
    }

    /// Per-beam plan applying the same correction to all `num_beams` beams.
    pub fn broadcast(&self, num_beams: usize) -> SyncPlan {
        SyncPlan::PerBeam {
            tau_syn_s: (0..num_beams).map(|k| self.tau_for(k)).collect(),
            nu_syn_hz: (0..num_beams).map(|k| self.nu_for(k)).collect(),
        }
    }

    pub(crate) fn per_beam_checked(&self, num_beams: usize) -> Result<(&[f64], &[f64])> {
        match self {
            SyncPlan::Joint { .. } => {
                Err(Error::Mode("effective beam channels need a per-beam plan; use broadcast() for joint".into()))
            }
            SyncPlan::PerBeam { tau_syn_s, nu_syn_hz } => {
                if tau_syn_s.len() != num_beams || nu_syn_hz.len() != num_beams {
                    return Err(Error::Domain(format!(
                        "plan covers {} beams, array has {num_beams}",
                        tau_syn_s.len()
                    )));
                }
                Ok((tau_syn_s, nu_syn_hz))
            }
        }
    }
}

/// Sync parameters: `τ_syn = τ_min` and `ν_syn` at the midpoint of the
/// frequency bounds, per beam or over all beams. Absent bounds give zero.
pub fn make_sync_plan(bounds: &OffsetBounds, mode: SyncMode) -> SyncPlan {
    match mode {
        SyncMode::Joint => SyncPlan::Joint {
            tau_syn_s: bounds.tau_aggregate().map_or(0.0, |i| i.min),
            nu_syn_hz: bounds.nu_aggregate().map_or(0.0, |i| i.midpoint()),
        },
        SyncMode::PerBeam => SyncPlan::PerBeam {
            tau_syn_s: bounds.beams.iter().map(|b| b.tau_s.map_or(0.0, |i| i.min)).collect(),
            nu_syn_hz: bounds.beams.iter().map(|b| b.nu_hz.map_or(0.0, |i| i.midpoint())).collect(),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadReport {
    pub delay_spread_s: f64,
    pub doppler_spread_hz: f64,
    pub mode: SyncMode,
    pub bound_mode: BoundMode,
}

/// Effective delay and Doppler spreads after synchronization.
///
/// The Doppler spread is the half-width of the frequency support, so the joint
/// value is `ν_u` under analytic bounds and the per-beam value is `ν_u/K`.
pub fn spreads(bounds: &OffsetBounds, mode: SyncMode) -> SpreadReport {
    let (delay, doppler) = match mode {
        SyncMode::Joint => (
            bounds.tau_aggregate().map_or(0.0, |i| i.width()),
            bounds.nu_aggregate().map_or(0.0, |i| 0.5 * i.width()),
        ),
        SyncMode::PerBeam => bounds.beams.iter().fold((0.0f64, 0.0f64), |(d, n), b| {
            (d.max(b.tau_s.map_or(0.0, |i| i.width())), n.max(b.nu_hz.map_or(0.0, |i| 0.5 * i.width())))
        }),
    };
    SpreadReport { delay_spread_s: delay, doppler_spread_hz: doppler, mode, bound_mode: bounds.bound_mode }
}
