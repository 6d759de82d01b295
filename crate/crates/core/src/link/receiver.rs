use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_sync, channel_apply_dl, ofdm_demodulate, ofdm_modulate, qpsk_demap, OfdmFrame, Waveform};
use crate::channel::power_matrix;
use crate::pbs::{effective_channel_dl, make_sync_plan, offset_bounds, BoundMode, OfdmConfig, SyncMode, SyncPlan};
use crate::sched::UtBeams;
use crate::{ArrayConfig, CMatrix, Error, Ray, Result, UtProfile};

/// Reported SINR when the measured error is exactly zero.
pub const SINR_CAP_DB: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub sync_mode: SyncMode,
    pub bound_mode: BoundMode,
    /// Noise variance per subcarrier after demodulation; zero disables noise.
    pub noise_power: f64,
    pub num_frames: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    pub sync_mode: SyncMode,
    pub evm_rms: f64,
    pub ber: f64,
    pub bit_errors: u64,
    pub num_bits: u64,
    /// Per subcarrier, measured against the ideal effective-channel model.
    pub sinr_db: Vec<f64>,
    /// Ratio of total model signal power to total model error power.
    pub mean_sinr_db: f64,
    pub pilot_overhead: f64,
    pub num_frames: usize,
}

fn to_db(signal: f64, error: f64) -> f64 {
    if error > 0.0 {
        (10.0 * (signal / error).log10()).min(SINR_CAP_DB)
    } else {
        SINR_CAP_DB
    }
}

/// Picks up to `max_streams` BS beams by decreasing `ω^bs` such that their
/// strongest UT beams are distinct, and receives on those UT beams.
pub fn link_beams(profile: &UtProfile, cfg: ArrayConfig, max_streams: usize) -> UtBeams {
    let omega = power_matrix(&profile.rays, cfg).omega;
    let col_power: Vec<f64> = (0..cfg.m()).map(|m| omega.column(m).sum()).collect();
    let mut order: Vec<usize> = (0..cfg.m()).filter(|&m| col_power[m] > 0.0).collect();
    order.sort_by(|&a, &b| col_power[b].total_cmp(&col_power[a]).then(a.cmp(&b)));
    let mut beams = UtBeams::default();
    for m in order {
        if beams.bs_beams.len() >= max_streams {
            break;
        }
        let k = (0..cfg.k()).max_by(|&a, &b| omega[(a, m)].total_cmp(&omega[(b, m)]).then(b.cmp(&a))).unwrap_or(0);
        if beams.ut_beams.insert(k) {
            beams.bs_beams.insert(m);
        }
    }
    beams
}

/// Linear interpolation of comb samples at `offset, offset + step, ...`,
/// holding the end values.
fn interpolate_comb(values: &[Complex64], offset: usize, step: usize, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| {
            if i <= offset {
                return values[0];
            }
            let q = (i - offset) / step;
            if q + 1 >= values.len() {
                return values[values.len() - 1];
            }
            let frac = ((i - offset) % step) as f64 / step as f64;
            values[q] * (1.0 - frac) + values[q + 1] * frac
        })
        .collect()
}

#[derive(Debug, Default)]
struct FrameStats {
    sq_err: f64,
    sq_ref: f64,
    bit_errors: u64,
    bits: u64,
    signal: Vec<f64>,
    error: Vec<f64>,
}

struct Setup<'a> {
    profile: UtProfile,
    plan: SyncPlan,
    tx: Vec<usize>,
    rx: Vec<usize>,
    ofdm: &'a OfdmConfig,
    cfg: ArrayConfig,
    params: &'a LinkParams,
}

fn run_frame(s: &Setup<'_>, frame_index: usize) -> Result<FrameStats> {
    let n_sc = s.ofdm.num_subcarriers;
    let mut rng = ChaCha8Rng::seed_from_u64(s.params.seed);
    rng.set_stream(frame_index as u64);
    let profile = s.profile.with_rays(s.profile.rays.redraw_phases(&mut rng));
    let frame = OfdmFrame::random(&s.tx, s.ofdm, &mut rng);

    let all = channel_apply_dl(&ofdm_modulate(&frame, s.ofdm), &profile, s.ofdm, s.cfg);
    let mut rx = Waveform { beams: s.rx.clone(), samples: s.rx.iter().map(|&k| all.samples[k].clone()).collect() };
    if s.params.noise_power > 0.0 {
        let sd = (s.params.noise_power * n_sc as f64 / 2.0).sqrt();
        let normal = Normal::new(0.0, sd).map_err(|e| Error::Domain(e.to_string()))?;
        for z in rx.samples.iter_mut().flatten() {
            *z += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    let synced = apply_sync(&rx, &s.plan, s.ofdm);
    let y: Vec<Vec<Vec<Complex64>>> =
        synced.samples.iter().map(|w| ofdm_demodulate(w, s.ofdm, frame.num_symbols())).collect();

    // LS estimates on each beam's comb, interpolated to all subcarriers
    let (nr, nt) = (s.rx.len(), s.tx.len());
    let est: Vec<Vec<Vec<Complex64>>> = (0..nr)
        .map(|r| {
            (0..nt)
                .map(|j| {
                    let comb: Vec<Complex64> =
                        (j..n_sc).step_by(nt).map(|n| y[r][0][n] / frame.pilot[j][n]).collect();
                    interpolate_comb(&comb, j, nt, n_sc)
                })
                .collect()
        })
        .collect();

    let mut st = FrameStats { signal: vec![0.0; n_sc], error: vec![0.0; n_sc], ..Default::default() };
    for n in 0..n_sc {
        let h = CMatrix::from_fn(nr, nt, |r, j| est[r][j][n]);
        let w = h.pseudo_inverse(1e-12).map_err(|e| Error::Domain(e.to_string()))?;
        let ideal = effective_channel_dl(&profile, &s.plan, n, s.ofdm, s.cfg)?.entries;
        let g = CMatrix::from_fn(nr, nt, |r, j| ideal[(s.rx[r], s.tx[j])]);
        for sym in 0..frame.data[0].len() {
            let x = CMatrix::from_fn(nt, 1, |j, _| frame.data[j][sym][n]);
            let yv = CMatrix::from_fn(nr, 1, |r, _| y[r][sym + 1][n]);
            let model = &g * &x;
            st.signal[n] += model.norm_squared();
            st.error[n] += (&yv - &model).norm_squared();
            let xh = &w * &yv;
            for j in 0..nt {
                st.sq_err += (xh[j] - x[j]).norm_sqr();
                st.sq_ref += x[j].norm_sqr();
                let (a, b) = (qpsk_demap(xh[j]), qpsk_demap(x[j]));
                st.bit_errors += u64::from(a.0 != b.0) + u64::from(a.1 != b.1);
                st.bits += 2;
            }
        }
    }
    Ok(st)
}

/// Simulates `num_frames` frames over one UT's channel with fresh ray phases
/// and data per frame.
///
/// Ray delays are rounded to whole samples first, so the simulated channel and
/// the per-subcarrier model share the same delays.
pub fn run_link(
    profile: &UtProfile,
    beams: &UtBeams,
    ofdm: &OfdmConfig,
    cfg: ArrayConfig,
    params: &LinkParams,
) -> Result<LinkMetrics> {
    if beams.bs_beams.is_empty() || beams.ut_beams.is_empty() {
        return Err(Error::EmptyAssignment("link needs at least one BS beam and one UT beam".into()));
    }
    if beams.bs_beams.iter().any(|&m| m >= cfg.m()) || beams.ut_beams.iter().any(|&k| k >= cfg.k()) {
        return Err(Error::Constraint("scheduled beam index out of range".into()));
    }
    if !(params.noise_power >= 0.0 && params.noise_power.is_finite()) {
        return Err(Error::Domain(format!("noise power must be >= 0, got {}", params.noise_power)));
    }
    if params.num_frames == 0 {
        return Err(Error::Domain("number of frames must be positive".into()));
    }
    let ts = ofdm.sample_interval_s;
    let quantized = profile.rays.map(|r| Ray { delay_s: ofdm.samples_for(r.delay_s) as f64 * ts, ..*r })?;
    let profile = profile.with_rays(quantized);
    let bounds = offset_bounds(&profile, cfg.k(), params.bound_mode)?;
    let plan = make_sync_plan(&bounds, params.sync_mode).broadcast(cfg.k());
    let setup = Setup {
        profile,
        plan,
        tx: beams.bs_beams.iter().copied().collect(),
        rx: beams.ut_beams.iter().copied().collect(),
        ofdm,
        cfg,
        params,
    };
    let frames: Vec<FrameStats> =
        (0..params.num_frames).into_par_iter().map(|f| run_frame(&setup, f)).collect::<Result<_>>()?;

    let n_sc = ofdm.num_subcarriers;
    let mut total = FrameStats { signal: vec![0.0; n_sc], error: vec![0.0; n_sc], ..Default::default() };
    for f in &frames {
        total.sq_err += f.sq_err;
        total.sq_ref += f.sq_ref;
        total.bit_errors += f.bit_errors;
        total.bits += f.bits;
        for n in 0..n_sc {
            total.signal[n] += f.signal[n];
            total.error[n] += f.error[n];
        }
    }
    Ok(LinkMetrics {
        sync_mode: params.sync_mode,
        evm_rms: (total.sq_err / total.sq_ref).sqrt(),
        ber: total.bit_errors as f64 / total.bits as f64,
        bit_errors: total.bit_errors,
        num_bits: total.bits,
        sinr_db: (0..n_sc).map(|n| to_db(total.signal[n], total.error[n])).collect(),
        mean_sinr_db: to_db(total.signal.iter().sum(), total.error.iter().sum()),
        pilot_overhead: 1.0 / (1 + super::NUM_DATA_SYMBOLS) as f64,
        num_frames: params.num_frames,
    })
}
