use std::f64::consts::TAU;

use super::{OfdmConfig, SyncPlan};
use crate::channel::{BeamChannel, FreqPoint, Orientation};
use crate::{cis, ArrayConfig, CMatrix, Error, Ray, Result, UtProfile};

fn check_subcarrier(n: usize, ofdm: &OfdmConfig) -> Result<()> {
    if n >= ofdm.num_subcarriers {
        return Err(Error::Domain(format!("subcarrier {n} out of range 0..{}", ofdm.num_subcarriers)));
    }
    Ok(())
}

#[inline]
fn synced_gain(ray: &Ray, phase: f64, profile: &UtProfile, tau: f64, nu: f64, f_n: f64) -> num_complex::Complex64 {
    let arg = phase + TAU * (tau * (profile.doppler(ray.aoa) - nu) - f_n * (ray.delay_s - tau));
    ray.amplitude() * cis(arg)
}

/// Effective DL beam channel (`K × M`) on subcarrier `n` after per-beam
/// synchronization with `plan`.
pub fn effective_channel_dl(
    profile: &UtProfile,
    plan: &SyncPlan,
    n: usize,
    ofdm: &OfdmConfig,
    cfg: ArrayConfig,
) -> Result<BeamChannel> {
    let (tau, nu) = plan.per_beam_checked(cfg.k())?;
    check_subcarrier(n, ofdm)?;
    let f_n = n as f64 / ofdm.symbol_duration_s();
    let mut g = CMatrix::zeros(cfg.k(), cfg.m());
    for ray in &profile.rays {
        let (k, m) = cfg.cell_of(ray);
        g[(k, m)] += synced_gain(ray, ray.phase_dl, profile, tau[k], nu[k], f_n);
    }
    Ok(BeamChannel { entries: g, time_s: 0.0, freq: FreqPoint::Subcarrier(n), orientation: Orientation::Downlink })
}

/// UL counterpart (`M × K`): UL phases, corrections indexed by the UT beam.
pub fn effective_channel_ul(
    profile: &UtProfile,
    plan: &SyncPlan,
    n: usize,
    ofdm: &OfdmConfig,
    cfg: ArrayConfig,
) -> Result<BeamChannel> {
    let (tau, nu) = plan.per_beam_checked(cfg.k())?;
    check_subcarrier(n, ofdm)?;
    let f_n = n as f64 / ofdm.symbol_duration_s();
    let mut g = CMatrix::zeros(cfg.m(), cfg.k());
    for ray in &profile.rays {
        let (k, m) = cfg.cell_of(ray);
        g[(m, k)] += synced_gain(ray, ray.phase_ul, profile, tau[k], nu[k], f_n);
    }
    Ok(BeamChannel { entries: g, time_s: 0.0, freq: FreqPoint::Subcarrier(n), orientation: Orientation::Uplink })
}
