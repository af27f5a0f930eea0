//! Boundary integral route from `δΛ` to the scattering transform.
//!
//! The CGO traces solve `u = u⁰ - S_k(δΛ u)` with the single-layer operator
//! `S_k f(z) = ∫ G_k(z - ζ) f(ζ) ds(ζ)` (or `G_k(ζ̄ - z̄)` for `u₂`). Traces are
//! projected on the orthonormal trigonometric basis that matches the rows of
//! the DN matrix; the logarithmic part of `G_k` is integrated exactly in
//! that basis and the smooth remainder by the trapezoidal rule.

use super::faddeev::{faddeev_log_limit, faddeev_unchecked};
use crate::dnmap::DnMap;
use crate::error::{invalid, Error, Result};
use crate::forward::trig_mode;
use crate::geometry::BoundaryCurve;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Boundary values of the CGO solutions at one `k`, sampled at the curve nodes.
#[derive(Debug, Clone)]
pub struct BoundaryTraces {
    pub k: Complex64,
    pub u1: Vec<Complex64>,
    pub u2: Vec<Complex64>,
    /// `δΛ u₁` and `δΛ u₂`.
    pub g1: Vec<Complex64>,
    pub g2: Vec<Complex64>,
    /// Arc-length derivatives of `g1` and `g2`.
    pub dg1: Vec<Complex64>,
    pub dg2: Vec<Complex64>,
    pub psi12: Vec<Complex64>,
    pub psi21: Vec<Complex64>,
}

/// Galerkin solver for the CGO boundary equations on one boundary curve.
#[derive(Debug, Clone)]
pub struct BieSolver {
    curve: BoundaryCurve,
    /// `φ_p(s_i)`, nodes × modes.
    basis: DMatrix<Complex64>,
    dbasis: DMatrix<Complex64>,
    /// Eigenvalues `1/(2|n|)` of `-(1/2π) ln|2 sin((s-t)/2)|` on each mode.
    log_eig: Vec<f64>,
    /// `(1/2π) ln|2 sin(d·ds/2)|` for node offset `d`.
    log_sin: Vec<f64>,
    delta: DMatrix<Complex64>,
    exterior_jump: bool,
}

impl BieSolver {
    /// `delta` is `δΛ` in the normalized trigonometric pattern basis of an
    /// even electrode count `L` (`L - 1` modes). With `exterior_jump` the
    /// Ψ traces include the half-density term of the exterior boundary limit.
    pub fn new(curve: BoundaryCurve, delta: &DnMap, exterior_jump: bool) -> Result<Self> {
        let modes = delta.size;
        let electrodes = modes + 1;
        if electrodes % 2 == 1 {
            return invalid("δΛ must have odd size L - 1");
        }
        let nb = curve.len();
        if nb < 2 * electrodes {
            return invalid(format!("need at least {} boundary nodes, got {nb}", 2 * electrodes));
        }
        let half = electrodes / 2;
        let mut basis = DMatrix::zeros(nb, modes);
        let mut dbasis = DMatrix::zeros(nb, modes);
        let mut log_eig = Vec::with_capacity(modes);
        for p in 0..modes {
            let j = p + 1;
            let freq = if j <= half { j } else { j - half };
            log_eig.push(1.0 / (2.0 * freq as f64));
            for i in 0..nb {
                let (v, d) = trig_mode(electrodes, j, curve.s(i));
                basis[(i, p)] = Complex64::new(v, 0.0);
                dbasis[(i, p)] = Complex64::new(d, 0.0);
            }
        }
        let log_sin = (0..nb)
            .map(|d| if d == 0 { 0.0 } else { (2.0 * (0.5 * d as f64 * curve.ds).sin()).abs().ln() / (2.0 * PI) })
            .collect();
        Ok(Self { curve, basis, dbasis, log_eig, log_sin, delta: delta.to_nalgebra(), exterior_jump })
    }

    pub fn curve(&self) -> &BoundaryCurve {
        &self.curve
    }

    pub fn modes(&self) -> usize {
        self.log_eig.len()
    }

    /// Smooth part `H(z_i, z_j) = G(i, j) + (1/2π) ln|2 sin((s_i - s_j)/2)|`
    /// with the diagonal set to its limit.
    fn smooth_kernel(&self, k: Complex64, conjugate: bool) -> DMatrix<Complex64> {
        let z = &self.curve.z;
        let nb = z.len();
        let diag = faddeev_log_limit(k);
        DMatrix::from_fn(nb, nb, |i, j| {
            if i == j {
                return Complex64::new(diag, 0.0);
            }
            let w = if conjugate { (z[j] - z[i]).conj() } else { z[i] - z[j] };
            let d = i.abs_diff(j);
            Complex64::new(faddeev_unchecked(k * w) + self.log_sin[d], 0.0)
        })
    }

    /// Solves one trace equation; returns `(u, g, g')` at the nodes.
    fn solve_trace(
        &self,
        k: Complex64,
        u0: &[Complex64],
        conjugate: bool,
    ) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> {
        let ds = self.curve.ds;
        let m = self.modes();
        let h = self.smooth_kernel(k, conjugate);
        let hphi = &h * &self.basis;
        let mut a = self.basis.tr_mul(&hphi) * Complex64::new(ds * ds, 0.0);
        for p in 0..m {
            a[(p, p)] += self.log_eig[p];
        }
        let u0v = DMatrix::from_column_slice(u0.len(), 1, u0);
        let b = self.basis.tr_mul(&u0v) * Complex64::new(ds, 0.0);
        let system = DMatrix::identity(m, m) + &a * &self.delta;
        let c = system
            .lu()
            .solve(&b)
            .filter(|c| c.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::Singular(format!("boundary Galerkin system singular at k = {k}")))?;
        let d = &self.delta * c;
        let g = &self.basis * &d;
        let dg = &self.dbasis * &d;
        // u = u⁰ - [smooth part + logarithmic part] applied to g
        let smooth = &h * &g * Complex64::new(ds, 0.0);
        let mut logd = d.clone();
        for p in 0..m {
            logd[p] *= self.log_eig[p];
        }
        let logpart = &self.basis * logd;
        let u = (0..u0.len()).map(|i| u0[i] - smooth[i] - logpart[i]).collect();
        Ok((u, g.iter().copied().collect(), dg.iter().copied().collect()))
    }

    /// CGO traces `u₁`, `u₂` and the Ψ traces at one `k ≠ 0`.
    pub fn traces(&self, k: Complex64) -> Result<BoundaryTraces> {
        if k.norm_sqr() == 0.0 {
            return invalid("boundary integral equations are undefined at k = 0");
        }
        let ik = I * k;
        let u10: Vec<_> = self.curve.z.iter().map(|z| (ik * z).exp() / ik).collect();
        let u20: Vec<_> = self.curve.z.iter().map(|z| -(-ik * z.conj()).exp() / ik).collect();
        let (u1, g1, dg1) = self.solve_trace(k, &u10, false)?;
        let (u2, g2, dg2) = self.solve_trace(k, &u20, true)?;
        let (psi12, psi21) = self.psi(k, &g1, &dg1, &g2, &dg2);
        Ok(BoundaryTraces { k, u1, u2, g1, g2, dg1, dg2, psi12, psi21 })
    }

    /// Principal-value integrals for Ψ₁₂ and Ψ₂₁. The node itself is excluded
    /// (the Simpson weights are symmetric about every node, so the odd part of
    /// the kernel cancels) and replaced by the limit of the even remainder.
    fn psi(
        &self,
        k: Complex64,
        g1: &[Complex64],
        dg1: &[Complex64],
        g2: &[Complex64],
        dg2: &[Complex64],
    ) -> (Vec<Complex64>, Vec<Complex64>) {
        let c = &self.curve;
        let nb = c.len();
        let kb = k.conj();
        let quarter_pi = 0.25 / PI;
        let mut psi12 = vec![Complex64::new(0.0, 0.0); nb];
        let mut psi21 = vec![Complex64::new(0.0, 0.0); nb];
        for i in 0..nb {
            let zi = c.z[i];
            let (mut a, mut b) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for j in 0..nb {
                if j == i {
                    continue;
                }
                let dz = zi - c.z[j];
                let w = c.weights[j] * quarter_pi;
                a += (I * kb * dz).exp() / dz * g2[j] * w;
                b += (-I * kb * dz.conj()).exp() / dz.conj() * g1[j] * w;
            }
            let (t, tt) = (c.tangent[i], c.zss[i]);
            // f(t)/(z - ζ(t)) = -f/(ζ'(t-s)) + [-f'/ζ' + f ζ''/(2ζ'²)] + O(t - s)
            let f = g2[i] * quarter_pi;
            let df = (-I * kb * t * g2[i] + dg2[i]) * quarter_pi;
            a += (-df / t + f * tt / (2.0 * t * t)) * c.weights[i];
            let f = g1[i] * quarter_pi;
            let df = (I * kb * t.conj() * g1[i] + dg1[i]) * quarter_pi;
            b += (-df / t.conj() + f * tt.conj() / (2.0 * t.conj() * t.conj())) * c.weights[i];
            if self.exterior_jump {
                a += c.normal[i].conj() * g2[i] * 0.25;
                b += c.normal[i] * g1[i] * 0.25;
            }
            psi12[i] = a;
            psi21[i] = b;
        }
        (psi12, psi21)
    }

    /// `(S₁₂(k), S₂₁(k))` from the Ψ traces by Simpson's rule.
    pub fn scattering_from_traces(&self, t: &BoundaryTraces) -> (Complex64, Complex64) {
        let c = &self.curve;
        let kb = t.k.conj();
        let (mut s12, mut s21) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for i in 0..c.len() {
            let z = c.z[i];
            let w = c.weights[i];
            s12 += (-I * kb * z).exp() * t.psi12[i] * c.normal[i] * w;
            s21 += (I * kb * z.conj()).exp() * t.psi21[i] * c.normal[i].conj() * w;
        }
        (s12 * I / (2.0 * PI), -s21 * I / (2.0 * PI))
    }

    pub fn scattering_at(&self, k: Complex64) -> Result<(Complex64, Complex64)> {
        Ok(self.scattering_from_traces(&self.traces(k)?))
    }
}
