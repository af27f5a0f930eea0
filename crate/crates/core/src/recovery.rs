//! From `M(z, 0)` to the potential `Q` and the admittivity.

use crate::error::{invalid, Result};
use crate::fft::Convolver;
use crate::forward::Region;
use crate::geometry::ZGrid;
use crate::prior::{wirtinger, CgoAt, PotentialField};
use num_complex::Complex64;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Denominators below this magnitude flag the pixel invalid.
pub const MIN_DENOMINATOR: f64 = 1e-8;

/// `Q₁₂ = ∂̄(M₁₁ + M₁₂)/(M₂₁ + M₂₂)` and `Q₂₁ = ∂(M₂₁ + M₂₂)/(M₁₁ + M₁₂)`
/// by centered differences on Ω, zero elsewhere. Returns the field and a
/// per-point validity flag; flagged points get `Q = 0`.
pub fn q_from_m(m: &CgoAt, grid: &ZGrid) -> Result<(PotentialField, Vec<bool>)> {
    let len = grid.len();
    if [&m.m11, &m.m12, &m.m21, &m.m22].iter().any(|f| f.len() != len) {
        return invalid("CGO field does not match the grid");
    }
    let top: Vec<Complex64> = m.m11.iter().zip(&m.m12).map(|(a, b)| a + b).collect();
    let bottom: Vec<Complex64> = m.m21.iter().zip(&m.m22).map(|(a, b)| a + b).collect();
    let mut q = PotentialField::zeros(len);
    let mut valid = vec![true; len];
    for i in (0..len).filter(|&i| grid.omega_mask[i]) {
        if bottom[i].norm() < MIN_DENOMINATOR || top[i].norm() < MIN_DENOMINATOR {
            valid[i] = false;
            continue;
        }
        let (r, c) = (i / grid.n, i % grid.n);
        let (_, dbar_top) = wirtinger(&top, grid.n, grid.h, r, c);
        let (d_bottom, _) = wirtinger(&bottom, grid.n, grid.h, r, c);
        let (a, b) = (dbar_top / bottom[i], d_bottom / top[i]);
        if a.is_finite() && b.is_finite() {
            q.q12[i] = a;
            q.q21[i] = b;
        } else {
            valid[i] = false;
        }
    }
    Ok((q, valid))
}

/// Which off-diagonal entry of `Q` the admittivity is recovered from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// `γ = exp(-(2/πz̄) ∗ Q₁₂)`.
    Q12,
    /// `γ = exp(-(2/πz) ∗ Q₂₁)`.
    Q21,
}

/// Admittivity from `Q` by FFT convolution with the Cauchy kernel over the grid.
pub fn gamma_from_q(q: &PotentialField, grid: &ZGrid, route: Route) -> Result<Vec<Complex64>> {
    let len = grid.len();
    if q.q12.len() != len || q.q21.len() != len {
        return invalid("potential does not match the grid");
    }
    let h = grid.h;
    let conj = route == Route::Q12;
    let conv = Convolver::new(grid.n, |dr, dc| {
        if dr == 0 && dc == 0 {
            return ZERO;
        }
        let d = Complex64::new(dc as f64, dr as f64);
        h / (PI * if conj { d.conj() } else { d })
    });
    let src = if conj { &q.q12 } else { &q.q21 };
    let mut out = vec![ZERO; len];
    conv.apply(src, &mut out, &mut conv.scratch());
    Ok(out.into_iter().map(|v| (-2.0 * v).exp()).collect())
}

/// Image-quality summary against a known truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// `‖Re(γ - γ_true)‖ / ‖Re γ_true‖` over Ω.
    pub rel_l2_re: f64,
    pub rel_l2_im: f64,
    /// Mean of `γ` over the Ω points outside every region (`background`),
    /// then over each region's grid points inside Ω.
    pub region_means: Vec<(String, Complex64)>,
}

impl Metrics {
    pub fn to_text(&self) -> String {
        let mut out = format!("rel_l2_re {}\nrel_l2_im {}\n", self.rel_l2_re, self.rel_l2_im);
        for (label, v) in &self.region_means {
            out.push_str(&format!("mean {label} {} {}\n", v.re, v.im));
        }
        out
    }
}

/// Relative L² errors and region means over the Ω points of `grid`. The
/// imaginary error is reported as the absolute norm when the truth has no
/// imaginary part.
pub fn compute_metrics(gamma: &[Complex64], truth: &[Complex64], grid: &ZGrid, regions: &[Region]) -> Result<Metrics> {
    if gamma.len() != grid.len() || truth.len() != grid.len() {
        return invalid("fields do not match the grid");
    }
    let inside: Vec<usize> = (0..grid.len()).filter(|&i| grid.omega_mask[i]).collect();
    let rel = |part: fn(Complex64) -> f64| {
        let num: f64 = inside.iter().map(|&i| (part(gamma[i]) - part(truth[i])).powi(2)).sum();
        let den: f64 = inside.iter().map(|&i| part(truth[i]).powi(2)).sum();
        if den > 0.0 {
            (num / den).sqrt()
        } else {
            (num / inside.len().max(1) as f64).sqrt()
        }
    };
    let masks: Vec<Vec<bool>> = regions.iter().map(|r| grid.polygon_mask(&r.polygon)).collect();
    let mean = |label: &str, pick: &dyn Fn(usize) -> bool| -> Result<(String, Complex64)> {
        let pts: Vec<usize> = inside.iter().copied().filter(|&i| pick(i)).collect();
        if pts.is_empty() {
            return invalid(format!("region '{label}' covers no grid points"));
        }
        let sum: Complex64 = pts.iter().map(|&i| gamma[i]).sum();
        Ok((label.to_string(), sum / pts.len() as f64))
    };
    let mut region_means = vec![mean("background", &|i| masks.iter().all(|m| !m[i]))?];
    for (r, m) in regions.iter().zip(&masks) {
        region_means.push(mean(&r.label, &|i| m[i])?);
    }
    Ok(Metrics { rel_l2_re: rel(|v| v.re), rel_l2_im: rel(|v| v.im), region_means })
}
