//! Beam division multiple access (BDMA) scheduling.
//!
//! Each UT gets a set of BS beams, disjoint from every other UT's, and a set of
//! its own UT beams. In the DL the BS beams transmit and the UT beams receive;
//! in the UL the roles are swapped. Rates use equal power allocation over the
//! scheduled transmit beams and are averaged over channel realizations.

mod exhaustive;
mod greedy;
mod rate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{ArrayConfig, Error, Result};

pub use exhaustive::{exhaustive_schedule, search_space_size, EXHAUSTIVE_LIMIT};
pub use greedy::{candidate_order, greedy_schedule_dl, greedy_schedule_ul, ScheduleOutcome};
pub use rate::{
    interference_free_rate, interference_free_rate_ul, sum_rate_dl, sum_rate_ul, ApproxSampler, ChannelSampler,
    ExactSampler, FixedSampler, RateEvaluator, SampledChannels,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Downlink,
    Uplink,
}

/// Beams scheduled for one UT.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtBeams {
    /// Beam indices at the BS, `0..M`.
    pub bs_beams: BTreeSet<usize>,
    /// Beam indices at the UT, `0..K`.
    pub ut_beams: BTreeSet<usize>,
}

/// Maximum set sizes: `B^bs_u`, `B^ut_u` per UT and `B^bs` in total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeamLimits {
    pub bs_per_ut: Vec<usize>,
    pub ut_per_ut: Vec<usize>,
    pub bs_total: usize,
}

impl BeamLimits {
    pub fn uniform(num_uts: usize, bs_per_ut: usize, ut_per_ut: usize, bs_total: usize) -> Self {
        Self { bs_per_ut: vec![bs_per_ut; num_uts], ut_per_ut: vec![ut_per_ut; num_uts], bs_total }
    }

    /// No restriction beyond the array sizes.
    pub fn unlimited(num_uts: usize, cfg: ArrayConfig) -> Self {
        Self::uniform(num_uts, cfg.m(), cfg.k(), cfg.m())
    }

    pub fn num_uts(&self) -> usize {
        self.bs_per_ut.len()
    }
}

/// JSON form of one UT's schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub ut: usize,
    pub tx_beams: Vec<usize>,
    pub rx_beams: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct AssignmentJson {
    direction: Direction,
    uts: Vec<AssignmentRecord>,
}

/// Beam sets of every UT for one link direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "AssignmentJson", try_from = "AssignmentJson")]
pub struct BeamAssignment {
    pub direction: Direction,
    pub uts: Vec<UtBeams>,
}

impl BeamAssignment {
    pub fn empty(direction: Direction, num_uts: usize) -> Self {
        Self { direction, uts: vec![UtBeams::default(); num_uts] }
    }

    pub fn num_uts(&self) -> usize {
        self.uts.len()
    }

    /// Transmit beams of UT `u` (BS beams in the DL, UT beams in the UL).
    pub fn tx_beams(&self, u: usize) -> &BTreeSet<usize> {
        match self.direction {
            Direction::Downlink => &self.uts[u].bs_beams,
            Direction::Uplink => &self.uts[u].ut_beams,
        }
    }

    /// Receive beams of UT `u` (UT beams in the DL, BS beams in the UL).
    pub fn rx_beams(&self, u: usize) -> &BTreeSet<usize> {
        match self.direction {
            Direction::Downlink => &self.uts[u].ut_beams,
            Direction::Uplink => &self.uts[u].bs_beams,
        }
    }

    pub fn total_bs_beams(&self) -> usize {
        self.uts.iter().map(|b| b.bs_beams.len()).sum()
    }

    pub fn records(&self) -> Vec<AssignmentRecord> {
        (0..self.num_uts())
            .map(|u| AssignmentRecord {
                ut: u,
                tx_beams: self.tx_beams(u).iter().copied().collect(),
                rx_beams: self.rx_beams(u).iter().copied().collect(),
            })
            .collect()
    }

    /// Checks beam ranges, BS-side disjointness, per-UT limits and the global
    /// BS-beam budget.
    pub fn validate(&self, limits: &BeamLimits, cfg: ArrayConfig) -> Result<()> {
        if limits.num_uts() != self.num_uts() || limits.ut_per_ut.len() != self.num_uts() {
            return Err(Error::Constraint(format!(
                "limits cover {} UTs, assignment has {}",
                limits.num_uts(),
                self.num_uts()
            )));
        }
        let mut owner = vec![None; cfg.m()];
        for (u, b) in self.uts.iter().enumerate() {
            if let Some(&m) = b.bs_beams.iter().find(|&&m| m >= cfg.m()) {
                return Err(Error::Constraint(format!("UT {u}: BS beam {m} out of range 0..{}", cfg.m())));
            }
            if let Some(&k) = b.ut_beams.iter().find(|&&k| k >= cfg.k()) {
                return Err(Error::Constraint(format!("UT {u}: UT beam {k} out of range 0..{}", cfg.k())));
            }
            for &m in &b.bs_beams {
                if let Some(other) = owner[m].replace(u) {
                    return Err(Error::Constraint(format!("BS beam {m} assigned to UTs {other} and {u}")));
                }
            }
            if b.bs_beams.len() > limits.bs_per_ut[u] {
                return Err(Error::Constraint(format!(
                    "UT {u}: {} BS beams exceed limit {}",
                    b.bs_beams.len(),
                    limits.bs_per_ut[u]
                )));
            }
            if b.ut_beams.len() > limits.ut_per_ut[u] {
                return Err(Error::Constraint(format!(
                    "UT {u}: {} UT beams exceed limit {}",
                    b.ut_beams.len(),
                    limits.ut_per_ut[u]
                )));
            }
        }
        if self.total_bs_beams() > limits.bs_total {
            return Err(Error::Constraint(format!(
                "{} BS beams exceed the total limit {}",
                self.total_bs_beams(),
                limits.bs_total
            )));
        }
        Ok(())
    }
}

impl From<BeamAssignment> for AssignmentJson {
    fn from(a: BeamAssignment) -> Self {
        Self { direction: a.direction, uts: a.records() }
    }
}

impl TryFrom<AssignmentJson> for BeamAssignment {
    type Error = Error;

    fn try_from(j: AssignmentJson) -> Result<Self> {
        let mut uts = vec![UtBeams::default(); j.uts.len()];
        for r in j.uts {
            let slot = uts
                .get_mut(r.ut)
                .ok_or_else(|| Error::Config(format!("UT index {} out of range", r.ut)))?;
            let (tx, rx): (BTreeSet<usize>, BTreeSet<usize>) =
                (r.tx_beams.into_iter().collect(), r.rx_beams.into_iter().collect());
            *slot = match j.direction {
                Direction::Downlink => UtBeams { bs_beams: tx, ut_beams: rx },
                Direction::Uplink => UtBeams { bs_beams: rx, ut_beams: tx },
            };
        }
        Ok(Self { direction: j.direction, uts })
    }
}

/// SNR and noise power; `ρ = P/σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub snr_linear: f64,
    pub noise_power: f64,
}

impl LinkBudget {
    pub fn from_power(power: f64, noise_power: f64) -> Result<Self> {
        if !(noise_power > 0.0 && noise_power.is_finite()) {
            return Err(Error::Domain(format!("noise power must be positive, got {noise_power}")));
        }
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::Domain(format!("power must be >= 0, got {power}")));
        }
        Ok(Self { snr_linear: power / noise_power, noise_power })
    }

    /// Unit noise power and the given SNR in dB.
    pub fn from_snr_db(snr_db: f64) -> Self {
        Self { snr_linear: 10f64.powf(snr_db / 10.0), noise_power: 1.0 }
    }

    pub fn power(&self) -> f64 {
        self.snr_linear * self.noise_power
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub sum_rate_bps_hz: f64,
    pub per_ut_rates: Vec<f64>,
    pub num_trials: usize,
    pub std_error: f64,
}
