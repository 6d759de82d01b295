use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{power_matrix, steering_vector, DftBeamformer};
use crate::pbs::{effective_channel_dl, make_sync_plan, offset_bounds, BoundMode, OfdmConfig, SyncMode};
use crate::{cis, ArrayConfig, CMatrix, Error, Result, UtProfile};

const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecorrelationStats {
    pub num_trials: usize,
    pub occupied_cells: usize,
    /// Largest `|corr|` between two distinct occupied entries.
    pub max_abs_corr: f64,
    /// Largest `|E|g|² / Ω - 1|` over occupied entries.
    pub max_var_rel_err: f64,
}

/// Sample second moments of the per-beam synchronized DL channel on
/// `subcarrier` over `num_trials` independent redraws of the ray phases.
/// Only cells with `Ω > 0` enter the statistics.
pub fn decorrelation_stats(
    profile: &UtProfile,
    cfg: ArrayConfig,
    ofdm: &OfdmConfig,
    subcarrier: usize,
    num_trials: usize,
    seed: u64,
) -> Result<DecorrelationStats> {
    if num_trials == 0 {
        return Err(Error::Domain("number of trials must be positive".into()));
    }
    let omega = power_matrix(&profile.rays, cfg).omega;
    let cells: Vec<(usize, usize)> =
        (0..cfg.k()).flat_map(|k| (0..cfg.m()).map(move |m| (k, m))).filter(|&c| omega[c] > 0.0).collect();
    let n = cells.len();
    if n == 0 {
        return Err(Error::Domain("ray set has no power".into()));
    }
    let bounds = offset_bounds(profile, cfg.k(), BoundMode::Analytic)?;
    let plan = make_sync_plan(&bounds, SyncMode::PerBeam);

    let chunks: Vec<CMatrix> = (0..num_trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = CMatrix::zeros(n, n);
            for t in c * CHUNK..((c + 1) * CHUNK).min(num_trials) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let p = profile.with_rays(profile.rays.redraw_phases(&mut rng));
                let g = effective_channel_dl(&p, &plan, subcarrier, ofdm, cfg)?.entries;
                let z = nalgebra::DVector::from_iterator(n, cells.iter().map(|&c| g[c]));
                acc.ger(num_complex::Complex64::new(1.0, 0.0), &z, &z.conjugate(), num_complex::Complex64::new(1.0, 0.0));
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut s = CMatrix::zeros(n, n);
    for c in &chunks {
        s += c;
    }

    let trials = num_trials as f64;
    let diag: Vec<f64> = (0..n).map(|i| s[(i, i)].re).collect();
    let mut max_corr = 0.0f64;
    for a in 0..n {
        for b in a + 1..n {
            let denom = (diag[a] * diag[b]).sqrt();
            if denom > 0.0 {
                max_corr = max_corr.max(s[(a, b)].norm() / denom);
            }
        }
    }
    let max_var = cells.iter().enumerate().map(|(i, &c)| (diag[i] / trials / omega[c] - 1.0).abs()).fold(0.0, f64::max);
    Ok(DecorrelationStats { num_trials, occupied_cells: n, max_abs_corr: max_corr, max_var_rel_err: max_var })
}

/// Power-weighted mean relative standard deviation of `|B[k, m](t, f)|` for
/// the exact DL beam channel over a `grid × grid` lattice with
/// `t_j = j / (grid·ν_u)` and `f_i = i·bandwidth/grid`. The ray phases are
/// held fixed.
pub fn envelope_variation(profile: &UtProfile, cfg: ArrayConfig, bandwidth_hz: f64, grid: usize) -> f64 {
    let vk = DftBeamformer::new(cfg.k());
    let vm = DftBeamformer::new(cfg.m());
    let rays: Vec<_> = profile.rays.iter().filter(|r| r.power > 0.0).collect();
    let u: Vec<_> = rays.iter().map(|r| vk.matrix().adjoint() * steering_vector(r.aoa, cfg.k())).collect();
    let w: Vec<_> = rays.iter().map(|r| vm.matrix().adjoint() * steering_vector(r.aod, cfg.m())).collect();
    let nu = profile.max_doppler_hz;
    let dt = if nu > 0.0 { 1.0 / (grid as f64 * nu) } else { 0.0 };
    let df = bandwidth_hz / grid as f64;
    let one = num_complex::Complex64::new(1.0, 0.0);

    let field = |t: f64, f: f64| {
        let mut b = CMatrix::zeros(cfg.k(), cfg.m());
        for (r, ray) in rays.iter().enumerate() {
            let g = ray.amplitude() * cis(ray.phase_dl + TAU * (t * profile.doppler(ray.aoa) - f * ray.delay_s));
            b.ger(g, &u[r], &w[r], one);
        }
        b.map(|z| z.norm())
    };
    // shifted sums keep the variance of a nearly constant envelope accurate
    let shift = field(0.0, 0.0);
    let rows: Vec<[DMatrix<f64>; 3]> = (0..grid)
        .into_par_iter()
        .map(|j| {
            let mut acc = [(); 3].map(|_| DMatrix::zeros(cfg.k(), cfg.m()));
            for i in 0..grid {
                let a = field(j as f64 * dt, i as f64 * df);
                let d = &a - &shift;
                acc[0] += &d;
                acc[1] += d.map(|x| x * x);
                acc[2] += a.map(|x| x * x);
            }
            acc
        })
        .collect();
    let pts = (grid * grid) as f64;
    let mut sums = [(); 3].map(|_| DMatrix::<f64>::zeros(cfg.k(), cfg.m()));
    for row in &rows {
        for (s, r) in sums.iter_mut().zip(row) {
            *s += r;
        }
    }
    let (mut num, mut den) = (0.0, 0.0);
    for e in 0..shift.len() {
        let mean_d = sums[0][e] / pts;
        let mean = shift[e] + mean_d;
        let power = sums[2][e] / pts;
        if mean <= 0.0 {
            continue;
        }
        let sd = (sums[1][e] / pts - mean_d * mean_d).max(0.0).sqrt();
        num += power * sd / mean;
        den += power;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Ray, RaySet};

    fn single_cell_profile() -> UtProfile {
        let (aoa, aod) = (crate::channel::beam_grid(8)[3], crate::channel::beam_grid(16)[5]);
        let rays = vec![
            Ray { power: 0.5, aoa, aod, delay_s: 0.0, phase_dl: 0.0, phase_ul: 0.0 },
            Ray { power: 0.25, aoa, aod, delay_s: 1e-7, phase_dl: 1.0, phase_ul: 0.0 },
            Ray { power: 0.25, aoa: -0.9, aod: 0.7, delay_s: 3e-7, phase_dl: 2.0, phase_ul: 0.0 },
        ];
        UtProfile::new(RaySet::new(rays).unwrap(), 30e9, 10.0).unwrap()
    }

    #[test]
    fn decorrelation_on_small_set() {
        let p = single_cell_profile();
        let cfg = ArrayConfig::new(16, 8).unwrap();
        let s = decorrelation_stats(&p, cfg, &OfdmConfig::table2(), 1, 4000, 9).unwrap();
        assert_eq!(s.occupied_cells, 2);
        assert!(s.max_abs_corr < 5.0 / 4000f64.sqrt(), "{s:?}");
        assert!(s.max_var_rel_err < 0.05, "{s:?}");
        let again = decorrelation_stats(&p, cfg, &OfdmConfig::table2(), 1, 4000, 9).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn lone_on_grid_ray_has_constant_envelope() {
        let aoa = crate::channel::beam_grid(8)[2];
        let aod = crate::channel::beam_grid(16)[9];
        let rays = RaySet::new(vec![Ray { power: 1.0, aoa, aod, delay_s: 5e-7, phase_dl: 0.3, phase_ul: 0.0 }]).unwrap();
        let p = UtProfile::new(rays, 30e9, 30.0).unwrap();
        assert!(envelope_variation(&p, ArrayConfig::new(16, 8).unwrap(), 100e6, 8) < 1e-9);
        assert!(envelope_variation(&single_cell_profile(), ArrayConfig::new(16, 8).unwrap(), 100e6, 8) > 0.01);
    }
}
