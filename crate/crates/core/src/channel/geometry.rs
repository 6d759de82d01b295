use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use super::{check_angle, UtProfile};
use crate::{cis, Result};

/// Half-wavelength ULA response: element `i` is `exp(-jπ·i·sin(angle))`.
pub fn steering_vector(angle: f64, n: usize) -> DVector<Complex64> {
    let s = angle.sin();
    DVector::from_fn(n, |i, _| cis(-PI * i as f64 * s))
}

/// BS array response at angle of departure `aod` for `m` antennas.
pub fn steering_bs(aod: f64, m: usize) -> Result<DVector<Complex64>> {
    check_angle("aod", aod)?;
    Ok(steering_vector(aod, m))
}

/// UT array response at angle of arrival `aoa` for `k` antennas.
pub fn steering_ut(aoa: f64, k: usize) -> Result<DVector<Complex64>> {
    check_angle("aoa", aoa)?;
    Ok(steering_vector(aoa, k))
}

/// Clarke-Jakes Doppler shift `ν_u·sin(aoa)` for motion parallel to the UT array.
pub fn doppler_of(aoa: f64, profile: &UtProfile) -> Result<f64> {
    check_angle("aoa", aoa)?;
    Ok(profile.doppler(aoa))
}

/// Virtual-angle boundaries `arcsin(2i/n - 1)` for `i = 0..=n`.
pub fn beam_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| (2.0 * i as f64 / n as f64 - 1.0).asin()).collect()
}

/// Beam cell containing `angle`: `k` with `angle ∈ [φ_k, φ_{k+1})`, the last
/// cell closed on the right.
///
/// `angle` is expected in `[-π/2, π/2]`; values outside are clamped to the
/// edge cells.
pub fn beam_index_of(angle: f64, n: usize) -> usize {
    debug_assert!(n > 0);
    let grid_at = |i: usize| (2.0 * i as f64 / n as f64 - 1.0).asin();
    let guess = ((angle.sin() + 1.0) * 0.5 * n as f64).floor();
    let mut k = if guess <= 0.0 { 0 } else { (guess as usize).min(n - 1) };
    // sin/asin round-off can put the guess one cell off near a boundary
    if k > 0 && angle < grid_at(k) {
        k -= 1;
    } else if k + 1 < n && angle >= grid_at(k + 1) {
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::RaySet;

    fn assert_vec_close(v: &DVector<Complex64>, expected: &[Complex64], tol: f64) {
        assert_eq!(v.len(), expected.len());
        for (a, b) in v.iter().zip(expected) {
            assert!((a - b).norm() < tol, "{a} != {b}");
        }
    }

    #[test]
    fn steering_examples() {
        let one = Complex64::new(1.0, 0.0);
        assert_vec_close(&steering_bs(0.0, 4).unwrap(), &[one; 4], 1e-15);
        assert_vec_close(&steering_bs(FRAC_PI_2, 2).unwrap(), &[one, -one], 1e-15);
        let expected: Vec<_> = (0..8).map(|b| cis(-PI * b as f64 * 0.5)).collect();
        assert_vec_close(&steering_bs(PI / 6.0, 8).unwrap(), &expected, 1e-14);

        assert_vec_close(&steering_ut(0.0, 3).unwrap(), &[one; 3], 1e-15);
        assert_vec_close(&steering_ut(-FRAC_PI_2, 2).unwrap(), &[one, -one], 1e-15);
        let expected: Vec<_> = (0..4).map(|k| cis(-PI * k as f64 * 0.25)).collect();
        assert_vec_close(&steering_ut(0.25f64.asin(), 4).unwrap(), &expected, 1e-14);
    }

    #[test]
    fn steering_rejects_out_of_range() {
        assert!(steering_bs(1.6, 4).is_err());
        assert!(steering_ut(-1.6, 4).is_err());
    }

    #[test]
    fn doppler_examples() {
        let p = UtProfile::with_max_doppler(RaySet::empty(), 30e9, 3000.0).unwrap();
        assert_eq!(doppler_of(0.0, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(doppler_of(FRAC_PI_2, &p).unwrap(), 3000.0, epsilon = 1e-9);
        assert!(doppler_of(2.0, &p).is_err());
    }

    #[test]
    fn grid_examples() {
        let g = beam_grid(2);
        assert_eq!(g, vec![-FRAC_PI_2, 0.0, FRAC_PI_2]);
        let g = beam_grid(4);
        let expected = [-FRAC_PI_2, (-0.5f64).asin(), 0.0, 0.5f64.asin(), FRAC_PI_2];
        for (a, b) in g.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert_eq!(beam_grid(1), vec![-FRAC_PI_2, FRAC_PI_2]);
    }

    #[test]
    fn index_examples() {
        assert_eq!(beam_index_of(0.0, 32), 16);
        assert_eq!(beam_index_of(-FRAC_PI_2, 8), 0);
        assert_eq!(beam_index_of(FRAC_PI_2, 8), 7);
    }

    #[test]
    fn grid_boundaries_start_their_cell() {
        for n in [1, 2, 3, 7, 8, 16, 33, 128, 256] {
            let grid = beam_grid(n);
            for (i, &b) in grid.iter().enumerate().take(n) {
                assert_eq!(beam_index_of(b, n), i, "n={n} boundary {i}");
            }
            assert_eq!(beam_index_of(grid[n], n), n - 1);
        }
    }

    proptest! {
        #[test]
        fn grid_is_strictly_increasing(n in 1usize..300) {
            let g = beam_grid(n);
            prop_assert_eq!(g.len(), n + 1);
            prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn index_lands_in_its_cell(angle in -FRAC_PI_2..=FRAC_PI_2, n in 1usize..300) {
            let g = beam_grid(n);
            let k = beam_index_of(angle, n);
            prop_assert!(k < n);
            prop_assert!(g[k] <= angle);
            prop_assert!(angle < g[k + 1] || (k == n - 1 && angle <= g[n]));
        }
    }
}
