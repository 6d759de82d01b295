use std::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BoundMode;
use crate::channel::{beam_index_of, check_angle};
use crate::{Error, Ray, RaySet, Result, UtProfile, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    fn point(x: f64) -> Self {
        Self { min: x, max: x }
    }

    fn include(self, x: f64) -> Self {
        Self { min: self.min.min(x), max: self.max.max(x) }
    }

    fn hull(a: Option<Self>, b: Option<Self>) -> Option<Self> {
        match (a, b) {
            (Some(a), Some(b)) => Some(Self { min: a.min.min(b.min), max: a.max.max(b.max) }),
            (a, b) => a.or(b),
        }
    }
}

/// Offsets seen on one receive beam. `None` marks a beam without rays.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BeamBounds {
    pub tau_s: Option<Interval>,
    pub nu_hz: Option<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetBounds {
    pub beams: Vec<BeamBounds>,
    pub max_doppler_hz: f64,
    pub bound_mode: BoundMode,
}

impl OffsetBounds {
    pub fn num_beams(&self) -> usize {
        self.beams.len()
    }

    /// `[τ_min, τ_max]` over all occupied beams.
    pub fn tau_aggregate(&self) -> Option<Interval> {
        self.beams.iter().fold(None, |acc, b| Interval::hull(acc, b.tau_s))
    }

    /// `[ν_min, ν_max]` over all beams with frequency bounds.
    pub fn nu_aggregate(&self) -> Option<Interval> {
        self.beams.iter().fold(None, |acc, b| Interval::hull(acc, b.nu_hz))
    }
}

fn analytic_nu(k: usize, num_beams: usize, nu_u: f64) -> Interval {
    let kf = num_beams as f64;
    Interval {
        min: (2.0 * k as f64 / kf - 1.0) * nu_u,
        max: (2.0 * (k + 1) as f64 / kf - 1.0) * nu_u,
    }
}

/// Per-beam time and frequency offset bounds for `num_beams` receive beams.
///
/// Delay bounds are always the extrema of the ray delays whose AoA falls in the
/// beam (all AoDs). Doppler bounds follow `bound_mode`. Rays with zero power
/// carry no signal and are ignored.
pub fn offset_bounds(profile: &UtProfile, num_beams: usize, bound_mode: BoundMode) -> Result<OffsetBounds> {
    if num_beams == 0 {
        return Err(Error::Domain("number of receive beams must be positive".into()));
    }
    let mut tau: Vec<Option<Interval>> = vec![None; num_beams];
    let mut nu: Vec<Option<Interval>> = vec![None; num_beams];
    for ray in profile.rays.iter().filter(|r| r.power > 0.0) {
        let k = beam_index_of(ray.aoa, num_beams);
        tau[k] = Some(tau[k].map_or(Interval::point(ray.delay_s), |i| i.include(ray.delay_s)));
        let d = profile.doppler(ray.aoa);
        nu[k] = Some(nu[k].map_or(Interval::point(d), |i| i.include(d)));
    }
    let nu_u = profile.max_doppler_hz;
    let beams = (0..num_beams)
        .map(|k| BeamBounds {
            tau_s: tau[k],
            nu_hz: match bound_mode {
                BoundMode::Analytic => Some(analytic_nu(k, num_beams, nu_u)),
                BoundMode::Empirical => nu[k],
            },
        })
        .collect();
    Ok(OffsetBounds { beams, max_doppler_hz: nu_u, bound_mode })
}

/// Closed-form bounds for a ring of scatterers of radius `radius_m` around the
/// UT, where a path arriving at `φ` has delay `(r/c)(1 + sin φ)`. Every beam is
/// occupied and both delay and Doppler bounds are cell images.
pub fn one_ring_bounds(radius_m: f64, max_doppler_hz: f64, num_beams: usize) -> Result<OffsetBounds> {
    if !(radius_m > 0.0 && radius_m.is_finite()) {
        return Err(Error::Domain(format!("ring radius must be positive, got {radius_m}")));
    }
    if num_beams == 0 {
        return Err(Error::Domain("number of receive beams must be positive".into()));
    }
    let scale = radius_m / SPEED_OF_LIGHT;
    let kf = num_beams as f64;
    let beams = (0..num_beams)
        .map(|k| BeamBounds {
            tau_s: Some(Interval { min: scale * (2.0 * k as f64 / kf), max: scale * (2.0 * (k + 1) as f64 / kf) }),
            nu_hz: Some(analytic_nu(k, num_beams, max_doppler_hz)),
        })
        .collect();
    Ok(OffsetBounds { beams, max_doppler_hz, bound_mode: BoundMode::Analytic })
}

/// Ray set of the one-ring model: AoA uniform on `[-π/2, π/2]`, delay
/// `(r/c)(1 + sin(aoa))`, AoD uniform on `aod_center ± aod_spread/2` (clipped),
/// equal powers summing to one and independent uniform phases.
pub fn one_ring_rays(
    radius_m: f64,
    num_rays: usize,
    aod_center: f64,
    aod_spread: f64,
    seed: u64,
) -> Result<RaySet> {
    if !(radius_m > 0.0 && radius_m.is_finite()) {
        return Err(Error::Domain(format!("ring radius must be positive, got {radius_m}")));
    }
    if num_rays == 0 {
        return Err(Error::Domain("one-ring model needs at least one ray".into()));
    }
    check_angle("aod_center", aod_center)?;
    if aod_spread.is_nan() || aod_spread < 0.0 {
        return Err(Error::Domain(format!("AoD spread must be >= 0, got {aod_spread}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let power = 1.0 / num_rays as f64;
    let rays = (0..num_rays)
        .map(|_| {
            let aoa = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
            let aod = (aod_center + aod_spread * (rng.random::<f64>() - 0.5)).clamp(-FRAC_PI_2, FRAC_PI_2);
            Ray {
                power,
                aoa,
                aod,
                delay_s: radius_m / SPEED_OF_LIGHT * (1.0 + aoa.sin()),
                phase_dl: rng.random_range(0.0..TAU),
                phase_ul: rng.random_range(0.0..TAU),
            }
        })
        .collect();
    RaySet::new(rays)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn ray(aoa: f64, delay_s: f64) -> Ray {
        Ray { power: 1.0, aoa, aod: 0.0, delay_s, phase_dl: 0.0, phase_ul: 0.0 }
    }

    #[test]
    fn analytic_first_beam() {
        let p = UtProfile::with_max_doppler(RaySet::empty(), 30e9, 3000.0).unwrap();
        let b = offset_bounds(&p, 32, BoundMode::Analytic).unwrap();
        let nu = b.beams[0].nu_hz.unwrap();
        assert_abs_diff_eq!(nu.min, -3000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(nu.max, -15.0 / 16.0 * 3000.0, epsilon = 1e-9);
        assert!(b.beams.iter().all(|bb| bb.tau_s.is_none()));
        let agg = b.nu_aggregate().unwrap();
        assert_eq!((agg.min, agg.max), (-3000.0, 3000.0));
    }

    #[test]
    fn empirical_single_ray_at_broadside() {
        let p = UtProfile::with_max_doppler(RaySet::new(vec![ray(0.0, 1e-7)]).unwrap(), 30e9, 3000.0).unwrap();
        let b = offset_bounds(&p, 8, BoundMode::Empirical).unwrap();
        let k = beam_index_of(0.0, 8);
        let nu = b.beams[k].nu_hz.unwrap();
        assert_eq!((nu.min, nu.max), (0.0, 0.0));
        assert_eq!(b.beams[k].tau_s.unwrap(), Interval { min: 1e-7, max: 1e-7 });
        assert_eq!(b.beams.iter().filter(|bb| bb.nu_hz.is_some()).count(), 1);
    }

    #[test]
    fn delay_bounds_group_by_aoa_only() {
        let rays = vec![
            Ray { aod: -1.0, ..ray(0.05, 2e-7) },
            Ray { aod: 1.0, ..ray(0.06, 5e-7) },
            ray(-1.2, 9e-7),
        ];
        let p = UtProfile::with_max_doppler(RaySet::new(rays).unwrap(), 30e9, 100.0).unwrap();
        let b = offset_bounds(&p, 4, BoundMode::Empirical).unwrap();
        let k = beam_index_of(0.05, 4);
        assert_eq!(b.beams[k].tau_s.unwrap(), Interval { min: 2e-7, max: 5e-7 });
        let agg = b.tau_aggregate().unwrap();
        assert_eq!((agg.min, agg.max), (2e-7, 9e-7));
    }

    #[test]
    fn zero_beams_is_an_error() {
        let p = UtProfile::new(RaySet::empty(), 30e9, 1.0).unwrap();
        assert!(offset_bounds(&p, 0, BoundMode::Analytic).is_err());
        assert!(one_ring_bounds(10.0, 1.0, 0).is_err());
    }

    #[test]
    fn one_ring_rays_follow_the_delay_law() {
        let rays = one_ring_rays(50.0, 1000, 0.2, 0.1, 7).unwrap();
        assert_eq!(rays.len(), 1000);
        assert!((rays.total_power() - 1.0).abs() < 1e-12);
        for r in &rays {
            assert_abs_diff_eq!(r.delay_s, 50.0 / SPEED_OF_LIGHT * (1.0 + r.aoa.sin()), epsilon = 1e-20);
            assert!((r.aod - 0.2).abs() <= 0.05 + 1e-15);
        }
        assert!(one_ring_rays(0.0, 10, 0.0, 0.1, 1).is_err());
        assert!(one_ring_rays(-5.0, 10, 0.0, 0.1, 1).is_err());
        assert!(one_ring_rays(5.0, 0, 0.0, 0.1, 1).is_err());
    }

    #[test]
    fn dense_one_ring_matches_cell_images() {
        let rays = one_ring_rays(50.0, 20_000, 0.0, 0.2, 3).unwrap();
        let p = UtProfile::new(rays, 30e9, 30.0).unwrap();
        let k = 8;
        let emp = offset_bounds(&p, k, BoundMode::Empirical).unwrap();
        let ana = one_ring_bounds(50.0, p.max_doppler_hz, k).unwrap();
        let width = 2.0 * 50.0 / SPEED_OF_LIGHT / k as f64;
        for (e, a) in emp.beams.iter().zip(&ana.beams) {
            let (e, a) = (e.tau_s.unwrap(), a.tau_s.unwrap());
            assert!(e.min >= a.min - 1e-18 && e.max <= a.max + 1e-18);
            assert!((e.min - a.min).abs() < 0.02 * width && (e.max - a.max).abs() < 0.02 * width);
        }
    }
}
