//! Brute-force evaluation of the Faddeev Green's function from its Fourier
//! integral `G_k(z) = e^{ikz} (2π)^{-2} ∫ e^{i z·ξ} / (ξ (ξ̄ + 2k)) dξ`.
//!
//! Polar coordinates in ξ; the radial integral is rotated onto the imaginary
//! axis (picking up the pole residue when it is swept over), then both
//! integrals are done by adaptive Gauss–Kronrod.

use super::quad::{integrate, integrate_with_breaks};
use num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `∫_0^∞ e^{iar} / (r + b) dr` for real `a ≠ 0`.
fn radial(a: f64, b: Complex64, tol: f64) -> Complex64 {
    let sigma = a.signum();
    let abs_a = a.abs();
    let beta = b * abs_a;
    // ∫_0^∞ e^{-t} / (iσt + β) dt, with t = u / (1 - u)
    let f = |u: f64| {
        if u >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let t = u / (1.0 - u);
        let jac = 1.0 / ((1.0 - u) * (1.0 - u));
        (-t).exp() * jac / (I * sigma * t + beta)
    };
    // near-singular point where iσt + β ≈ 0
    let t_star = (I * sigma * beta).re;
    let mut breaks = Vec::new();
    if t_star > 0.0 {
        breaks.push(t_star / (1.0 + t_star));
    }
    let rotated = I * sigma * integrate_with_breaks(f, 0.0, 1.0, &breaks, tol);
    let pole = -b;
    let swept = pole.re > 0.0 && (if sigma > 0.0 { pole.im > 0.0 } else { pole.im < 0.0 });
    if swept {
        rotated + sigma * 2.0 * PI * I * (-I * a * b).exp()
    } else {
        rotated
    }
}

fn wrap(x: f64) -> f64 {
    x.rem_euclid(2.0 * PI)
}

/// Faddeev Green's function from the defining Fourier integral.
pub fn faddeev_by_quadrature(z: Complex64, k: Complex64) -> Complex64 {
    let rho = z.norm();
    let alpha = z.arg();
    let kang = k.arg();
    let breaks = [
        wrap(alpha + 0.5 * PI),
        wrap(alpha - 0.5 * PI),
        wrap((-k.conj()).arg()),
        wrap(0.5 * PI - kang),
        wrap(-0.5 * PI - kang),
    ];
    let inner_tol = 1e-7;
    let integrand = |phi: f64| {
        let a = rho * (phi - alpha).cos();
        if a == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        radial(a, 2.0 * k * Complex64::from_polar(1.0, phi), inner_tol)
    };
    let total = integrate_with_breaks(integrand, 0.0, 2.0 * PI, &breaks, 1e-6);
    (I * k * z).exp() * total / (4.0 * PI * PI)
}

#[allow(dead_code)]
pub fn radial_check(a: f64, b: Complex64) -> Complex64 {
    // direct truncated oscillatory integral, for sanity checks only
    integrate(|r| (I * a * r).exp() / (r + b), 0.0, 400.0, 1e-9)
}
