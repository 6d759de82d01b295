//! Array geometry and the ray-based beam-domain channel model.
//!
//! A [`RaySet`] is a finite list of propagation paths. It discretizes the
//! power angle spectrum, so every channel quantity in this module is a finite
//! sum over rays. Downlink matrices are `K × M` (UT antennas by BS antennas),
//! uplink matrices are `M × K`.

mod beam;
mod geometry;

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, SPEED_OF_LIGHT};

pub use beam::{
    beam_channel_approx_dl, beam_channel_approx_ul, beam_channel_exact, beam_norms, power_matrix,
    space_channel_dl, beam_kernel, BeamChannel, BeamTransform, DftBeamformer, FreqPoint, Orientation,
    PowerMatrix,
};
pub use geometry::{beam_grid, beam_index_of, doppler_of, steering_bs, steering_ut, steering_vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayConfig {
    /// BS antennas (`M`).
    pub num_bs_antennas: usize,
    /// UT antennas (`K`).
    pub num_ut_antennas: usize,
}

impl ArrayConfig {
    pub fn new(num_bs_antennas: usize, num_ut_antennas: usize) -> Result<Self> {
        if num_bs_antennas == 0 || num_ut_antennas == 0 {
            return Err(Error::Domain(format!(
                "array sizes must be positive, got M={num_bs_antennas}, K={num_ut_antennas}"
            )));
        }
        Ok(Self { num_bs_antennas, num_ut_antennas })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.num_bs_antennas
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.num_ut_antennas
    }

    /// Beam cell `(k, m)` of a ray: receive (UT) beam from the AoA, transmit
    /// (BS) beam from the AoD.
    pub fn cell_of(&self, ray: &Ray) -> (usize, usize) {
        (
            beam_index_of(ray.aoa, self.num_ut_antennas),
            beam_index_of(ray.aod, self.num_bs_antennas),
        )
    }
}

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    /// Linear power.
    pub power: f64,
    /// Angle of arrival at the UT array, radians.
    pub aoa: f64,
    /// Angle of departure at the BS array, radians.
    pub aod: f64,
    /// Propagation delay, seconds.
    pub delay_s: f64,
    pub phase_dl: f64,
    pub phase_ul: f64,
}

impl Ray {
    pub fn validate(&self) -> Result<()> {
        check_angle("aoa", self.aoa)?;
        check_angle("aod", self.aod)?;
        if !(self.power >= 0.0 && self.power.is_finite()) {
            return Err(Error::Domain(format!("ray power must be finite and >= 0, got {}", self.power)));
        }
        if !(self.delay_s >= 0.0 && self.delay_s.is_finite()) {
            return Err(Error::Domain(format!("ray delay must be finite and >= 0, got {}", self.delay_s)));
        }
        for (name, p) in [("phase_dl", self.phase_dl), ("phase_ul", self.phase_ul)] {
            if !(0.0..TAU).contains(&p) {
                return Err(Error::Domain(format!("{name} must lie in [0, 2π), got {p}")));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn amplitude(&self) -> f64 {
        self.power.sqrt()
    }
}

pub(crate) fn check_angle(name: &str, angle: f64) -> Result<()> {
    if (-FRAC_PI_2..=FRAC_PI_2).contains(&angle) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {angle} rad lies outside [-π/2, π/2]")))
    }
}

/// A validated list of rays. Serializes as a plain JSON array.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Ray>", into = "Vec<Ray>")]
pub struct RaySet {
    rays: Vec<Ray>,
}

impl RaySet {
    pub fn new(rays: Vec<Ray>) -> Result<Self> {
        for ray in &rays {
            ray.validate()?;
        }
        Ok(Self { rays })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Ray> {
        self.rays.iter()
    }

    pub fn as_slice(&self) -> &[Ray] {
        &self.rays
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.rays.iter().map(|r| r.power).sum()
    }

    /// Same geometry and powers with fresh independent DL and UL phases.
    pub fn redraw_phases<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let rays = self
            .rays
            .iter()
            .map(|r| Ray { phase_dl: rng.random_range(0.0..TAU), phase_ul: rng.random_range(0.0..TAU), ..*r })
            .collect();
        Self { rays }
    }

    /// Applies `f` to each ray and revalidates.
    pub fn map(&self, f: impl FnMut(&Ray) -> Ray) -> Result<Self> {
        Self::new(self.rays.iter().map(f).collect())
    }
}

impl TryFrom<Vec<Ray>> for RaySet {
    type Error = Error;

    fn try_from(rays: Vec<Ray>) -> Result<Self> {
        Self::new(rays)
    }
}

impl From<RaySet> for Vec<Ray> {
    fn from(set: RaySet) -> Self {
        set.rays
    }
}

impl<'a> IntoIterator for &'a RaySet {
    type Item = &'a Ray;
    type IntoIter = std::slice::Iter<'a, Ray>;

    fn into_iter(self) -> Self::IntoIter {
        self.rays.iter()
    }
}

/// Rays of one UT together with its mobility parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtProfile {
    pub rays: RaySet,
    pub carrier_freq_hz: f64,
    pub velocity_mps: f64,
    /// `carrier_freq_hz · velocity_mps / c`.
    pub max_doppler_hz: f64,
}

impl UtProfile {
    pub fn new(rays: RaySet, carrier_freq_hz: f64, velocity_mps: f64) -> Result<Self> {
        if !(carrier_freq_hz > 0.0 && carrier_freq_hz.is_finite()) {
            return Err(Error::Domain(format!("carrier frequency must be positive, got {carrier_freq_hz}")));
        }
        if !(velocity_mps >= 0.0 && velocity_mps.is_finite()) {
            return Err(Error::Domain(format!("velocity must be >= 0, got {velocity_mps}")));
        }
        Ok(Self { rays, carrier_freq_hz, velocity_mps, max_doppler_hz: carrier_freq_hz * velocity_mps / SPEED_OF_LIGHT })
    }

    /// Profile with a prescribed maximum Doppler shift; the velocity is backed out.
    pub fn with_max_doppler(rays: RaySet, carrier_freq_hz: f64, max_doppler_hz: f64) -> Result<Self> {
        let mut profile = Self::new(rays, carrier_freq_hz, 0.0)?;
        if !(max_doppler_hz >= 0.0 && max_doppler_hz.is_finite()) {
            return Err(Error::Domain(format!("max Doppler must be >= 0, got {max_doppler_hz}")));
        }
        profile.velocity_mps = max_doppler_hz * SPEED_OF_LIGHT / carrier_freq_hz;
        profile.max_doppler_hz = max_doppler_hz;
        Ok(profile)
    }

    pub fn with_rays(&self, rays: RaySet) -> Self {
        Self { rays, ..self.clone() }
    }

    /// Doppler shift of a path arriving at `aoa`.
    #[inline]
    pub fn doppler(&self, aoa: f64) -> f64 {
        self.max_doppler_hz * aoa.sin()
    }
}
