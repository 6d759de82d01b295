use std::f64::consts::{FRAC_PI_2, SQRT_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::ScenarioConfig;
use crate::{Ray, RaySet, Result, UtProfile};

/// Independent 64-bit seed for a named purpose and index, derived from the
/// master seed. Adding purposes or indices never shifts existing streams.
pub fn derive_seed(master: u64, purpose: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(purpose.as_bytes());
    h.update(index.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// Laplacian sample with standard deviation `sigma` by inverse CDF.
fn laplacian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    let b = sigma / SQRT_2;
    let u: f64 = rng.random_range(-0.5..0.5);
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Power-weighted RMS spread of `(power, delay)` pairs.
pub fn rms_delay_spread(rays: &RaySet) -> f64 {
    let total = rays.total_power();
    if total <= 0.0 {
        return 0.0;
    }
    let mean = rays.iter().map(|r| r.power * r.delay_s).sum::<f64>() / total;
    let second = rays.iter().map(|r| r.power * r.delay_s * r.delay_s).sum::<f64>() / total;
    (second - mean * mean).max(0.0).sqrt()
}

/// Clustered ray set for one UT.
///
/// Cluster delays are exponential draws sorted and shifted to start at zero,
/// then rescaled so the power-weighted RMS delay spread equals the configured
/// value. Cluster powers fall by `cluster_decay_db` per cluster in delay order
/// and sum to one; subpaths split their cluster's power equally and share its
/// delay. Subpath angles are Laplacian around the cluster means and clipped to
/// the AoD sector and to `[-π/2, π/2]` for AoAs.
pub fn generate_cluster_rays(config: &ScenarioConfig, ut_index: usize, rng_seed: u64) -> Result<RaySet> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(ut_index as u64);
    let nc = config.num_clusters;
    let mut delays: Vec<f64> = (0..nc).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    delays.sort_by(f64::total_cmp);
    let d0 = delays[0];
    delays.iter_mut().for_each(|d| *d -= d0);
    let mut powers: Vec<f64> = (0..nc).map(|c| 10f64.powf(-config.cluster_decay_db * c as f64 / 10.0)).collect();
    let total: f64 = powers.iter().sum();
    powers.iter_mut().for_each(|p| *p /= total);

    let mean: f64 = powers.iter().zip(&delays).map(|(p, d)| p * d).sum();
    let second: f64 = powers.iter().zip(&delays).map(|(p, d)| p * d * d).sum();
    let spread = (second - mean * mean).max(0.0).sqrt();
    let scale = if spread > 0.0 { config.delay_spread_s / spread } else { 0.0 };

    let sector = config.aod_sector_rad;
    let sp = config.subpaths_per_cluster;
    let mut rays = Vec::with_capacity(nc * sp);
    for c in 0..nc {
        let aod_c = rng.random_range(-sector..=sector);
        let aoa_c = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
        for _ in 0..sp {
            let aod = (aod_c + laplacian(&mut rng, config.angle_spread_rad)).clamp(-sector, sector);
            let aoa = (aoa_c + laplacian(&mut rng, config.angle_spread_rad)).clamp(-FRAC_PI_2, FRAC_PI_2);
            rays.push(Ray {
                power: powers[c] / sp as f64,
                aoa,
                aod,
                delay_s: delays[c] * scale,
                phase_dl: rng.random_range(0.0..TAU),
                phase_ul: rng.random_range(0.0..TAU),
            });
        }
    }
    RaySet::new(rays)
}

/// Ray sets and mobility of all `num_uts` UTs.
pub fn drop_uts(config: &ScenarioConfig) -> Result<Vec<UtProfile>> {
    let seed = derive_seed(config.master_seed, "ut-rays", 0);
    (0..config.num_uts)
        .map(|u| UtProfile::new(generate_cluster_rays(config, u, seed)?, config.carrier_freq_hz, config.velocity_mps))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Preset;

    #[test]
    fn rays_are_normalized_and_in_range() {
        let c = ScenarioConfig::preset(Preset::Desk);
        for seed in 0..20 {
            let rays = generate_cluster_rays(&c, 0, seed).unwrap();
            assert_eq!(rays.len(), 80);
            assert!((rays.total_power() - 1.0).abs() < 1e-9);
            for r in &rays {
                assert!(r.aod.abs() <= c.aod_sector_rad);
                assert!(r.aoa.abs() <= FRAC_PI_2);
                assert!(r.delay_s >= 0.0);
            }
        }
    }

    #[test]
    fn delay_spread_hits_target() {
        let c = ScenarioConfig::preset(Preset::Desk);
        let mean: f64 =
            (0..100).map(|s| rms_delay_spread(&generate_cluster_rays(&c, 1, s).unwrap())).sum::<f64>() / 100.0;
        assert!((mean / 1388.4e-9 - 1.0).abs() < 0.1);
    }

    #[test]
    fn subpaths_cluster_around_means() {
        let c = ScenarioConfig::preset(Preset::Desk);
        let rays = generate_cluster_rays(&c, 2, 7).unwrap();
        for cluster in rays.as_slice().chunks(20) {
            let d = cluster[0].delay_s;
            assert!(cluster.iter().all(|r| r.delay_s == d));
            let mean_aoa = cluster.iter().map(|r| r.aoa).sum::<f64>() / 20.0;
            // 2° RMS spread, so subpaths stay within a few degrees
            assert!(cluster.iter().all(|r| (r.aoa - mean_aoa).abs() < 15f64.to_radians()));
        }
    }

    #[test]
    fn laplacian_has_requested_spread() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| laplacian(&mut rng, 0.5)).collect();
        let var = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((var.sqrt() - 0.5).abs() < 0.01);
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(1, "a", 0), derive_seed(1, "a", 0));
        assert_ne!(derive_seed(1, "a", 0), derive_seed(1, "a", 1));
        assert_ne!(derive_seed(1, "a", 0), derive_seed(1, "b", 0));
        assert_ne!(derive_seed(1, "a", 0), derive_seed(2, "a", 0));
    }

    #[test]
    fn uts_get_different_rays() {
        let c = ScenarioConfig::preset(Preset::Desk);
        let uts = drop_uts(&c).unwrap();
        assert_eq!(uts.len(), 4);
        assert_ne!(uts[0].rays, uts[1].rays);
        assert_eq!(uts, drop_uts(&c).unwrap());
    }
}
