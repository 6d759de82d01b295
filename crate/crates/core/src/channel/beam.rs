use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{steering_vector, ArrayConfig, Ray, RaySet, UtProfile};
use crate::{cis, CMatrix};

/// Unitary DFT beamformer with entry `(i, j) = exp(-j2π·i·(j - N/2)/N)/√N`.
///
/// Column `j` steers towards the virtual angle `arcsin(2j/N - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DftBeamformer {
    matrix: CMatrix,
}

impl DftBeamformer {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "DFT beamformer dimension must be positive");
        let scale = 1.0 / (n as f64).sqrt();
        let half = n as f64 / 2.0;
        let matrix = CMatrix::from_fn(n, n, |i, j| {
            // reduce i·(j - N/2) mod N before scaling to keep the phase small
            let phase = -TAU * ((i as f64 * (j as f64 - half)) % n as f64) / n as f64;
            cis(phase) * scale
        });
        Self { matrix }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Row/column layout of a beam-domain matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `K × M`, indexed `(k, m)`.
    Downlink,
    /// `M × K`, indexed `(m, k)`.
    Uplink,
}

/// Frequency coordinate of a [`BeamChannel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreqPoint {
    Hz(f64),
    Subcarrier(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamChannel {
    pub entries: CMatrix,
    pub time_s: f64,
    pub freq: FreqPoint,
    pub orientation: Orientation,
}

impl BeamChannel {
    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }
}

/// Left/right DFT transform pair for one array configuration.
#[derive(Debug, Clone)]
pub struct BeamTransform {
    vk: DftBeamformer,
    vm: DftBeamformer,
}

impl BeamTransform {
    pub fn new(cfg: ArrayConfig) -> Self {
        Self { vk: DftBeamformer::new(cfg.k()), vm: DftBeamformer::new(cfg.m()) }
    }

    /// `V_Kᴴ · G · V_M*` for a `K × M` space-domain matrix.
    pub fn to_beam_dl(&self, space: &CMatrix) -> CMatrix {
        self.vk.matrix().adjoint() * space * self.vm.matrix().conjugate()
    }

    /// `V_Mᴴ · G · V_K*` for an `M × K` space-domain matrix.
    pub fn to_beam_ul(&self, space: &CMatrix) -> CMatrix {
        self.vm.matrix().adjoint() * space * self.vk.matrix().conjugate()
    }

    /// Exact DL beam channel, see [`beam_channel_exact`].
    pub fn beam_channel_exact(&self, profile: &UtProfile, t: f64, f: f64) -> BeamChannel {
        let cfg = ArrayConfig { num_bs_antennas: self.vm.dimension(), num_ut_antennas: self.vk.dimension() };
        BeamChannel {
            entries: self.to_beam_dl(&space_channel_dl(profile, t, f, cfg)),
            time_s: t,
            freq: FreqPoint::Hz(f),
            orientation: Orientation::Downlink,
        }
    }
}

/// Per-ray complex gain `√p·exp(jζ)·exp(j2π[t·ν(aoa) - f·τ])`.
#[inline]
fn ray_gain(ray: &Ray, phase: f64, profile: &UtProfile, t: f64, f: f64) -> Complex64 {
    ray.amplitude() * cis(phase + TAU * (t * profile.doppler(ray.aoa) - f * ray.delay_s))
}

/// DL space-domain frequency response `Σ_r g_r · v_ut(aoa_r) · v_bs(aod_r)ᵀ`
/// at time `t` and frequency `f`, a `K × M` matrix.
pub fn space_channel_dl(profile: &UtProfile, t: f64, f: f64, cfg: ArrayConfig) -> CMatrix {
    let mut g = CMatrix::zeros(cfg.k(), cfg.m());
    let one = Complex64::new(1.0, 0.0);
    for ray in &profile.rays {
        let a = steering_vector(ray.aoa, cfg.k());
        let b = steering_vector(ray.aod, cfg.m());
        g.ger(ray_gain(ray, ray.phase_dl, profile, t, f), &a, &b, one);
    }
    g
}

/// Exact DL beam-domain channel `V_Kᴴ · G(t, f) · V_M*`.
///
/// Builds the DFT matrices on every call; use [`BeamTransform`] to reuse them.
pub fn beam_channel_exact(profile: &UtProfile, t: f64, f: f64, cfg: ArrayConfig) -> BeamChannel {
    BeamTransform::new(cfg).beam_channel_exact(profile, t, f)
}

/// Beam-domain approximation: each ray contributes its full gain to the single
/// cell `(k, m)` containing its `(aoa, aod)`.
pub fn beam_channel_approx_dl(profile: &UtProfile, t: f64, f: f64, cfg: ArrayConfig) -> BeamChannel {
    let mut g = CMatrix::zeros(cfg.k(), cfg.m());
    for ray in &profile.rays {
        let (k, m) = cfg.cell_of(ray);
        g[(k, m)] += ray_gain(ray, ray.phase_dl, profile, t, f);
    }
    BeamChannel { entries: g, time_s: t, freq: FreqPoint::Hz(f), orientation: Orientation::Downlink }
}

/// UL counterpart of [`beam_channel_approx_dl`]: UL phases, `M × K` layout.
pub fn beam_channel_approx_ul(profile: &UtProfile, t: f64, f: f64, cfg: ArrayConfig) -> BeamChannel {
    let mut g = CMatrix::zeros(cfg.m(), cfg.k());
    for ray in &profile.rays {
        let (k, m) = cfg.cell_of(ray);
        g[(m, k)] += ray_gain(ray, ray.phase_ul, profile, t, f);
    }
    BeamChannel { entries: g, time_s: t, freq: FreqPoint::Hz(f), orientation: Orientation::Uplink }
}

/// Beam-domain channel power matrix Ω (`K × M`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMatrix {
    pub omega: DMatrix<f64>,
}

impl PowerMatrix {
    pub fn zeros(cfg: ArrayConfig) -> Self {
        Self { omega: DMatrix::zeros(cfg.k(), cfg.m()) }
    }

    pub fn k(&self) -> usize {
        self.omega.nrows()
    }

    pub fn m(&self) -> usize {
        self.omega.ncols()
    }

    pub fn total(&self) -> f64 {
        self.omega.sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { omega: &self.omega * c }
    }
}

/// `Ω[k, m]` = total power of the rays in cell `(k, m)`.
pub fn power_matrix(rays: &RaySet, cfg: ArrayConfig) -> PowerMatrix {
    let mut pm = PowerMatrix::zeros(cfg);
    for ray in rays {
        let (k, m) = cfg.cell_of(ray);
        pm.omega[(k, m)] += ray.power;
    }
    pm
}

/// Average squared beam norms: BS side `Σ_k Ω[k, m]` (length `M`) and UT side
/// `Σ_m Ω[k, m]` (length `K`).
pub fn beam_norms(omega: &PowerMatrix) -> (DVector<f64>, DVector<f64>) {
    let bs = DVector::from_iterator(omega.m(), omega.omega.column_iter().map(|c| c.sum()));
    let ut = DVector::from_iterator(omega.k(), omega.omega.row_iter().map(|r| r.sum()));
    (bs, ut)
}

/// Dirichlet beam kernel `(1/√N) Σ_{a<N} exp(jπ·a·x)`.
pub fn beam_kernel(n: usize, x: f64) -> Complex64 {
    let half = 0.5 * PI * x;
    let denom = half.sin();
    if denom.abs() < 1e-12 {
        // x on an even integer: every term equals exp(jπ·a·x) = (±1)^a... x = 2j gives 1
        let terms: Complex64 = (0..n).map(|a| cis(PI * a as f64 * x)).sum();
        return terms / (n as f64).sqrt();
    }
    cis(half * (n as f64 - 1.0)) * ((n as f64 * half).sin() / ((n as f64).sqrt() * denom))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::channel::{beam_grid, steering_bs, steering_ut};

    fn ray(power: f64, aoa: f64, aod: f64, delay_s: f64) -> Ray {
        Ray { power, aoa, aod, delay_s, phase_dl: 0.0, phase_ul: 0.0 }
    }

    fn profile(rays: Vec<Ray>, nu: f64) -> UtProfile {
        UtProfile::with_max_doppler(RaySet::new(rays).unwrap(), 30e9, nu).unwrap()
    }

    fn random_profile(seed: u64, n: usize) -> UtProfile {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rays = (0..n)
            .map(|_| Ray {
                power: rng.random_range(0.1..1.0),
                aoa: rng.random_range(-1.5..1.5),
                aod: rng.random_range(-1.0..1.0),
                delay_s: rng.random_range(0.0..2e-6),
                phase_dl: rng.random_range(0.0..TAU),
                phase_ul: rng.random_range(0.0..TAU),
            })
            .collect();
        profile(rays, 2500.0)
    }

    /// Scalar triple loop over rays and antenna pairs.
    fn space_channel_oracle(p: &UtProfile, t: f64, f: f64, k: usize, m: usize) -> CMatrix {
        let mut g = CMatrix::zeros(k, m);
        for r in &p.rays {
            let nu = p.max_doppler_hz * r.aoa.sin();
            for a in 0..k {
                for b in 0..m {
                    let phase = r.phase_dl + TAU * (t * nu - f * r.delay_s)
                        - PI * a as f64 * r.aoa.sin()
                        - PI * b as f64 * r.aod.sin();
                    g[(a, b)] += Complex64::from_polar(r.power.sqrt(), phase);
                }
            }
        }
        g
    }

    #[test]
    fn dft_is_unitary() {
        for n in [1, 2, 3, 4, 7, 8, 16, 31, 64, 128, 256] {
            let v = DftBeamformer::new(n);
            let err = (v.matrix().adjoint() * v.matrix() - CMatrix::identity(n, n)).norm();
            assert!(err < 1e-10, "n={n}: {err}");
        }
    }

    #[test]
    fn dft_columns_steer_to_virtual_angles() {
        let n = 16;
        let v = DftBeamformer::new(n);
        let grid = beam_grid(n);
        for (j, &phi) in grid.iter().enumerate().take(n) {
            let col = v.matrix().column(j).into_owned();
            let expected = steering_vector(phi, n).unscale((n as f64).sqrt());
            assert!((col - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn single_ray_space_channel_is_outer_product() {
        let p = profile(vec![ray(1.0, 0.3, -0.4, 1e-7)], 1000.0);
        let cfg = ArrayConfig::new(6, 4).unwrap();
        let g = space_channel_dl(&p, 0.0, 0.0, cfg);
        let expected = steering_ut(0.3, 4).unwrap() * steering_bs(-0.4, 6).unwrap().transpose();
        assert!((g - expected).norm() < 1e-12);
    }

    #[test]
    fn empty_rays_give_zero_channels() {
        let p = profile(vec![], 1000.0);
        let cfg = ArrayConfig::new(8, 4).unwrap();
        assert_eq!(space_channel_dl(&p, 1e-3, 1e6, cfg).norm(), 0.0);
        assert_eq!(beam_channel_exact(&p, 1e-3, 1e6, cfg).frobenius_norm(), 0.0);
        assert_eq!(beam_channel_approx_dl(&p, 1e-3, 1e6, cfg).frobenius_norm(), 0.0);
    }

    #[test]
    fn space_channel_matches_scalar_oracle() {
        let p = profile(vec![ray(0.7, 0.2, -0.6, 3e-7), ray(0.3, -1.1, 0.45, 9e-7)], 3000.0);
        let cfg = ArrayConfig::new(9, 5).unwrap();
        for (t, f) in [(0.0, 0.0), (1.3e-4, 2.5e7), (7e-4, -4e7)] {
            let fast = space_channel_dl(&p, t, f, cfg);
            let slow = space_channel_oracle(&p, t, f, 5, 9);
            assert!((fast - slow).norm() < 1e-12);
        }
        let p = random_profile(11, 25);
        let cfg = ArrayConfig::new(16, 8).unwrap();
        let fast = space_channel_dl(&p, 2e-4, 3e7, cfg);
        let slow = space_channel_oracle(&p, 2e-4, 3e7, 8, 16);
        assert!((fast - slow).norm() < 1e-12);
    }

    #[test]
    fn beam_transform_preserves_norm() {
        let p = random_profile(3, 30);
        for (m, k) in [(16, 8), (32, 16), (64, 32)] {
            let cfg = ArrayConfig::new(m, k).unwrap();
            let space = space_channel_dl(&p, 1e-4, 1e7, cfg);
            let beam = beam_channel_exact(&p, 1e-4, 1e7, cfg);
            assert!((beam.frobenius_norm() - space.norm()).abs() < 1e-10 * space.norm().max(1.0));
        }
    }

    #[test]
    fn exact_channel_matches_beam_kernel_route() {
        // Independent route: per-ray Dirichlet kernels in closed form.
        let p = random_profile(5, 12);
        let cfg = ArrayConfig::new(12, 6).unwrap();
        let (t, f) = (3e-4, 1.5e7);
        let exact = beam_channel_exact(&p, t, f, cfg);
        let mut oracle = CMatrix::zeros(6, 12);
        for r in &p.rays {
            let g = r.power.sqrt()
                * cis(r.phase_dl + TAU * (t * p.max_doppler_hz * r.aoa.sin() - f * r.delay_s));
            for k in 0..6 {
                for m in 0..12 {
                    let qk = beam_kernel(6, 2.0 * k as f64 / 6.0 - 1.0 - r.aoa.sin());
                    let qm = beam_kernel(12, 2.0 * m as f64 / 12.0 - 1.0 - r.aod.sin());
                    oracle[(k, m)] += g * qk * qm;
                }
            }
        }
        assert!((exact.entries - oracle).norm() < 1e-10);
    }

    #[test]
    fn ray_on_virtual_angles_stays_in_its_cell() {
        for (m, k) in [(16, 8), (64, 32), (256, 128)] {
            let cfg = ArrayConfig::new(m, k).unwrap();
            let (kk, mm) = (k / 4 + 1, 3 * m / 4 - 2);
            let aoa = beam_grid(k)[kk];
            let aod = beam_grid(m)[mm];
            let p = profile(vec![ray(1.0, aoa, aod, 0.0)], 0.0);
            let beam = beam_channel_exact(&p, 0.0, 0.0, cfg).entries;
            let total = beam.norm_squared();
            let in_cell = beam[(kk, mm)].norm_sqr();
            assert!((total - in_cell) / total < 1e-20 + 1e-12, "leak {}", total - in_cell);
            // array gain: the full K·M energy lands in one beam pair
            assert_abs_diff_eq!(in_cell, (k * m) as f64, epsilon = 1e-8 * (k * m) as f64);
        }
    }

    #[test]
    fn off_grid_ray_leakage_follows_dirichlet_kernel() {
        let cfg = ArrayConfig::new(32, 16).unwrap();
        // a quarter of a cell above the virtual angle of cell (5, 20)
        let aoa = (2.0 * 5.25 / 16.0 - 1.0f64).asin();
        let aod = (2.0 * 20.25 / 32.0 - 1.0f64).asin();
        let p = profile(vec![ray(1.0, aoa, aod, 0.0)], 0.0);
        let beam = beam_channel_exact(&p, 0.0, 0.0, cfg).entries;
        let frac = beam[(5, 20)].norm_sqr() / beam.norm_squared();
        let d = |n: usize, x: f64| beam_kernel(n, x).norm_sqr() / n as f64;
        let expected = d(16, -2.0 * 0.25 / 16.0) * d(32, -2.0 * 0.25 / 32.0);
        assert_abs_diff_eq!(frac, expected, epsilon = 1e-10);
        assert!(frac > 0.6 && frac < 0.7);
    }

    #[test]
    fn approx_single_ray_lands_in_its_cell() {
        let cfg = ArrayConfig::new(16, 8).unwrap();
        let r = ray(0.49, 0.1, -0.3, 0.0);
        let p = profile(vec![r], 500.0);
        let (k, m) = cfg.cell_of(&r);
        let dl = beam_channel_approx_dl(&p, 0.0, 0.0, cfg).entries;
        assert_abs_diff_eq!(dl[(k, m)].re, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(dl.norm_squared(), 0.49, epsilon = 1e-15);
        let ul = beam_channel_approx_ul(&p, 0.0, 0.0, cfg).entries;
        assert_eq!(ul.shape(), (16, 8));
        assert_abs_diff_eq!(ul[(m, k)].re, 0.7, epsilon = 1e-15);
    }

    #[test]
    fn ul_and_dl_magnitudes_match() {
        let p = random_profile(8, 40);
        let cfg = ArrayConfig::new(16, 8).unwrap();
        // with one ray per cell the magnitudes coincide exactly
        let mut seen = std::collections::HashSet::new();
        let unique: Vec<Ray> = p.rays.iter().filter(|r| seen.insert(cfg.cell_of(r))).copied().collect();
        let p = p.with_rays(RaySet::new(unique).unwrap());
        let dl = beam_channel_approx_dl(&p, 2e-4, 1e7, cfg).entries;
        let ul = beam_channel_approx_ul(&p, 2e-4, 1e7, cfg).entries;
        for k in 0..8 {
            for m in 0..16 {
                assert_abs_diff_eq!(dl[(k, m)].norm(), ul[(m, k)].norm(), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn power_matrix_and_norms() {
        let cfg = ArrayConfig::new(6, 4).unwrap();
        let r = ray(1.0, 0.2, -0.1, 0.0);
        let pm = power_matrix(&RaySet::new(vec![r]).unwrap(), cfg);
        let (k, m) = cfg.cell_of(&r);
        assert_eq!(pm.omega[(k, m)], 1.0);
        assert_eq!(pm.total(), 1.0);

        let zero = PowerMatrix::zeros(cfg);
        let (bs, ut) = beam_norms(&zero);
        assert_eq!((bs.len(), ut.len()), (6, 4));
        assert!(bs.iter().chain(ut.iter()).all(|&x| x == 0.0));

        let mut single = PowerMatrix::zeros(cfg);
        single.omega[(2, 3)] = 1.0;
        let (bs, ut) = beam_norms(&single);
        assert_eq!(bs, DVector::from_fn(6, |i, _| if i == 3 { 1.0 } else { 0.0 }));
        assert_eq!(ut, DVector::from_fn(4, |i, _| if i == 2 { 1.0 } else { 0.0 }));
    }

    #[test]
    fn kernel_limits() {
        assert_abs_diff_eq!(beam_kernel(8, 0.0).re, 8f64.sqrt(), epsilon = 1e-12);
        for x in [0.013, 0.25, -0.7, 1.0, 1.9] {
            let direct: Complex64 = (0..8).map(|a| cis(PI * a as f64 * x)).sum::<Complex64>() / 8f64.sqrt();
            assert!((beam_kernel(8, x) - direct).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn power_matrix_conserves_power(seed in 0u64..500, n in 0usize..40) {
            let p = random_profile(seed, n);
            let cfg = ArrayConfig::new(32, 8).unwrap();
            let pm = power_matrix(&p.rays, cfg);
            let total = p.rays.total_power();
            prop_assert!((pm.total() - total).abs() <= 1e-9 * total.max(1e-300));
            prop_assert!(pm.omega.iter().all(|&x| x >= 0.0));
            let (bs, ut) = beam_norms(&pm);
            prop_assert!((bs.sum() - pm.total()).abs() < 1e-12);
            prop_assert!((ut.sum() - pm.total()).abs() < 1e-12);
        }
    }
}
