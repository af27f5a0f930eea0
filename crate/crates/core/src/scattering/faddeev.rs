//! Faddeev Green's function `G_k(z) = e^{ikz} g_k(z)` of the Laplacian,
//! `g_k(z) = (2π)^{-2} ∫ e^{i z·ξ} / (ξ(ξ̄ + 2k)) dξ`.
//!
//! Closed form: `G_k(z) = Re E1(-ikz) / (2π)`. It depends on `(z, k)` only
//! through the product `kz`, so `G_k(z) = G_1(kz)`.

use crate::error::{invalid, Result};
use crate::special::{exp_integral_e1, EULER_GAMMA};
use num_complex::Complex64;
use std::f64::consts::PI;

pub fn faddeev_g(z: Complex64, k: Complex64) -> Result<Complex64> {
    if z.norm_sqr() == 0.0 {
        return invalid("Faddeev Green's function is logarithmically singular at z = 0");
    }
    if k.norm_sqr() == 0.0 {
        return invalid("Faddeev Green's function is undefined at k = 0");
    }
    Ok(Complex64::new(faddeev_unchecked(z * k), 0.0))
}

/// `G_1(w)` for `w = kz ≠ 0`.
#[inline]
pub(crate) fn faddeev_unchecked(w: Complex64) -> f64 {
    exp_integral_e1(Complex64::new(w.im, -w.re)).re / (2.0 * PI)
}

/// `lim_{z→0} [G_k(z) + ln|z|/(2π)] = -(γ_E + ln|k|)/(2π)`.
pub fn faddeev_log_limit(k: Complex64) -> f64 {
    -(EULER_GAMMA + k.norm().ln()) / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_and_limit() {
        let z = Complex64::new(0.3, -0.2);
        let k = Complex64::new(1.5, 0.7);
        let a = faddeev_g(z, k).unwrap();
        let b = faddeev_g(z * k, Complex64::new(1.0, 0.0)).unwrap();
        assert!((a - b).norm() < 1e-15);
        let tiny = Complex64::new(1e-7, 2e-7);
        let g = faddeev_g(tiny, k).unwrap().re + tiny.norm().ln() / (2.0 * PI);
        assert!((g - faddeev_log_limit(k)).abs() < 1e-6);
        assert!(faddeev_g(Complex64::new(0.0, 0.0), k).is_err());
        assert!(faddeev_g(z, Complex64::new(0.0, 0.0)).is_err());
    }
}
