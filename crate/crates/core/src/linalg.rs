use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// `exp(j·phase)`.
#[inline]
pub fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// `log2 det(A)` for a Hermitian positive definite `A`.
///
/// An empty matrix has determinant one. Falls back to an LU determinant if the
/// Cholesky factorization fails, which only happens for matrices that are
/// numerically singular or not positive definite.
pub fn log2_det_hermitian(a: &CMatrix) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    match Cholesky::new(a.clone()) {
        Some(chol) => {
            let l = chol.l_dirty();
            2.0 * (0..a.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>() / std::f64::consts::LN_2
        }
        None => a.clone().determinant().norm().log2(),
    }
}
