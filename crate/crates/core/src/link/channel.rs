use std::f64::consts::TAU;

use num_complex::Complex64;

use super::Waveform;
use crate::pbs::{OfdmConfig, SyncPlan};
use crate::{cis, ArrayConfig, UtProfile};

/// Nearest whole-sample delay of a ray.
pub fn delay_samples(delay_s: f64, ofdm: &OfdmConfig) -> usize {
    ofdm.samples_for(delay_s)
}

/// Passes BS-beam waveforms through the ray channel to all `K` UT beams.
///
/// Receive beam `k` collects, for every ray whose AoA lies in cell `k` and
/// whose AoD cell carries a waveform, `√p·exp(jζ_dl)·exp(j2π t ν(aoa))` times
/// that waveform delayed by the ray delay (nearest sample). `t` is the
/// absolute receive time of each sample. The output is longer than the input
/// by the largest delay.
pub fn channel_apply_dl(tx: &Waveform, profile: &UtProfile, ofdm: &OfdmConfig, cfg: ArrayConfig) -> Waveform {
    let in_len = tx.len();
    let max_delay = profile.rays.iter().map(|r| delay_samples(r.delay_s, ofdm)).max().unwrap_or(0);
    let out_len = in_len + max_delay;
    let mut out = vec![vec![Complex64::ZERO; out_len]; cfg.k()];
    for ray in &profile.rays {
        let (k, m) = cfg.cell_of(ray);
        let Some(j) = tx.beams.iter().position(|&b| b == m) else { continue };
        let d = delay_samples(ray.delay_s, ofdm);
        let gain = ray.amplitude() * cis(ray.phase_dl);
        let w = TAU * profile.doppler(ray.aoa);
        let src = &tx.samples[j];
        for (i, y) in out[k].iter_mut().enumerate().skip(d).take(src.len()) {
            *y += gain * cis(w * ofdm.sample_time(i)) * src[i - d];
        }
    }
    Waveform { beams: (0..cfg.k()).collect(), samples: out }
}

/// Applies the time and frequency corrections of `plan` to each beam:
/// `out(t) = in(t + τ_syn)·exp(-j2π(t + τ_syn)·ν_syn)`, with `τ_syn` rounded to
/// whole samples. Samples shifted in from beyond the end are zero.
pub fn apply_sync(rx: &Waveform, plan: &SyncPlan, ofdm: &OfdmConfig) -> Waveform {
    let samples = rx
        .beams
        .iter()
        .zip(&rx.samples)
        .map(|(&k, x)| {
            let d = ofdm.samples_for(plan.tau_for(k));
            let w = -TAU * plan.nu_for(k);
            (0..x.len())
                .map(|i| match x.get(i + d) {
                    Some(&z) => z * cis(w * ofdm.sample_time(i + d)),
                    None => Complex64::ZERO,
                })
                .collect()
        })
        .collect();
    Waveform { beams: rx.beams.clone(), samples }
}
