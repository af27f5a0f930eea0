//! Smooth closed curves as truncated Fourier series, and boundary node sets
//! in model units for the boundary integral equations.

use crate::error::{parse_err, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `z(t) = Σ c_n e^{int}`, `t ∈ [0, 2π)`.
#[derive(Debug, Clone)]
pub struct FourierCurve {
    coefs: Vec<(i32, Complex64)>,
    /// Fourier coefficients of the speed |z'(t)|, indexed from -K..=K.
    speed: Vec<(i32, Complex64)>,
}

impl FourierCurve {
    pub fn new(coefs: Vec<(i32, Complex64)>) -> Self {
        let mut c = Self { coefs, speed: Vec::new() };
        c.speed = c.speed_coefficients(1024);
        c
    }

    pub fn circle(radius: f64) -> Self {
        Self::new(vec![(1, Complex64::new(radius, 0.0))])
    }

    /// Parses `n re im` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut coefs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || parse_err(format!("curve line {}", lineno + 1), line.to_string());
            if f.len() != 3 {
                return Err(bad());
            }
            let n: i32 = f[0].parse().map_err(|_| bad())?;
            let re: f64 = f[1].parse().map_err(|_| bad())?;
            let im: f64 = f[2].parse().map_err(|_| bad())?;
            coefs.push((n, Complex64::new(re, im)));
        }
        if coefs.is_empty() {
            return Err(parse_err("curve", "no coefficients"));
        }
        Ok(Self::new(coefs))
    }

    /// Trigonometric interpolant through points assumed equispaced in parameter.
    pub fn interpolate(points: &[Complex64]) -> Self {
        let n = points.len();
        let mut buf = points.to_vec();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let half = (n / 2) as i32;
        let coefs = (-(half - 1)..half).map(|k| (k, buf[k.rem_euclid(n as i32) as usize] / n as f64)).collect();
        Self::new(coefs)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.coefs.iter().map(|&(n, c)| (n, c * s)).collect())
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.coefs.iter().map(|&(n, c)| c * Complex64::from_polar(1.0, n as f64 * t)).sum()
    }

    pub fn d1(&self, t: f64) -> Complex64 {
        self.coefs.iter().map(|&(n, c)| c * I * n as f64 * Complex64::from_polar(1.0, n as f64 * t)).sum()
    }

    pub fn d2(&self, t: f64) -> Complex64 {
        self.coefs.iter().map(|&(n, c)| -c * (n * n) as f64 * Complex64::from_polar(1.0, n as f64 * t)).sum()
    }

    fn speed_coefficients(&self, m: usize) -> Vec<(i32, Complex64)> {
        let mut buf: Vec<Complex64> =
            (0..m).map(|j| Complex64::new(self.d1(2.0 * PI * j as f64 / m as f64).norm(), 0.0)).collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        let half = (m / 2) as i32;
        (-(half - 1)..half)
            .map(|k| (k, buf[k.rem_euclid(m as i32) as usize] / m as f64))
            .filter(|(_, c)| c.norm() > 1e-15)
            .collect()
    }

    /// Arc length from `t = 0` to `t`.
    pub fn arclength(&self, t: f64) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for &(n, c) in &self.speed {
            if n == 0 {
                s += c * t;
            } else {
                s += c * (Complex64::from_polar(1.0, n as f64 * t) - 1.0) / (I * n as f64);
            }
        }
        s.re
    }

    pub fn perimeter(&self) -> f64 {
        self.speed.iter().find(|(n, _)| *n == 0).map_or(0.0, |(_, c)| c.re) * 2.0 * PI
    }

    /// Parameter value at arc length `s` (Newton on the spectral arc-length function).
    pub fn param_at(&self, s: f64) -> f64 {
        let per = self.perimeter();
        let mut t = 2.0 * PI * s / per;
        for _ in 0..50 {
            let f = self.arclength(t) - s;
            let step = f / self.d1(t).norm();
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        t
    }

    pub fn sample_by_arclength(&self, count: usize) -> Vec<Complex64> {
        let per = self.perimeter();
        (0..count).map(|i| self.eval(self.param_at(per * i as f64 / count as f64))).collect()
    }
}

/// Boundary nodes equispaced in arc length, scaled so the perimeter is 2π.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    /// Node positions in model units.
    pub z: Vec<Complex64>,
    /// Unit tangent dz/ds.
    pub tangent: Vec<Complex64>,
    /// Outward unit normal.
    pub normal: Vec<Complex64>,
    /// Second arc-length derivative d²z/ds².
    pub zss: Vec<Complex64>,
    /// Arc-length node spacing (model units).
    pub ds: f64,
    /// Periodic Simpson weights.
    pub weights: Vec<f64>,
    /// mm → model scaling factor.
    pub scale: f64,
}

impl BoundaryCurve {
    pub fn new(curve: &FourierCurve, nodes: usize) -> Self {
        assert!(nodes >= 4 && nodes.is_multiple_of(2), "node count must be even");
        let per = curve.perimeter();
        let scale = 2.0 * PI / per;
        let ds = 2.0 * PI / nodes as f64;
        let mut z = Vec::with_capacity(nodes);
        let mut tangent = Vec::with_capacity(nodes);
        let mut zss = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let t = curve.param_at(per * i as f64 / nodes as f64);
            let d1 = curve.d1(t);
            let d2 = curve.d2(t);
            let speed = d1.norm();
            let tan = d1 / speed;
            // curvature in mm⁻¹, then in model units
            let kappa = (d1.conj() * d2).im / speed.powi(3) / scale;
            z.push(curve.eval(t) * scale);
            tangent.push(tan);
            zss.push(I * kappa * tan);
        }
        let normal = tangent.iter().map(|t| -I * t).collect();
        let weights = (0..nodes).map(|i| if i % 2 == 0 { 2.0 * ds / 3.0 } else { 4.0 * ds / 3.0 }).collect();
        Self { z, tangent, normal, zss, ds, weights, scale }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Arc length of node `i` in model units.
    pub fn s(&self, i: usize) -> f64 {
        self.ds * i as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_arclength_is_exact() {
        let c = FourierCurve::circle(2.0);
        assert!((c.perimeter() - 4.0 * PI).abs() < 1e-12);
        assert!((c.param_at(1.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn boundary_nodes_on_unit_circle() {
        let b = BoundaryCurve::new(&FourierCurve::circle(37.0), 64);
        for i in 0..b.len() {
            assert!((b.z[i].norm() - 1.0).abs() < 1e-12);
            assert!((b.normal[i] - b.z[i]).norm() < 1e-12);
            // d²z/ds² = -z on the unit circle
            assert!((b.zss[i] + b.z[i]).norm() < 1e-10);
        }
        let total: f64 = b.weights.iter().sum();
        assert!((total - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn interpolation_reproduces_ellipse() {
        let pts: Vec<_> = (0..64)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / 64.0;
                Complex64::new(3.0 * t.cos(), 2.0 * t.sin())
            })
            .collect();
        let c = FourierCurve::interpolate(&pts);
        let t = 0.3;
        assert!((c.eval(t) - Complex64::new(3.0 * t.cos(), 2.0 * t.sin())).norm() < 1e-12);
    }

    #[test]
    fn node_spacing_is_uniform_in_arclength() {
        let c = FourierCurve::new(vec![
            (1, Complex64::new(2.0, 0.0)),
            (-1, Complex64::new(0.7, 0.0)),
            (3, Complex64::new(0.05, 0.02)),
        ]);
        let b = BoundaryCurve::new(&c, 128);
        let mut chords = 0.0;
        for i in 0..b.len() {
            chords += (b.z[(i + 1) % b.len()] - b.z[i]).norm();
        }
        assert!((chords - 2.0 * PI).abs() < 1e-2);
        for i in 0..b.len() {
            let d = (b.z[(i + 1) % b.len()] - b.z[i]).norm();
            assert!((d / b.ds - 1.0).abs() < 5e-3);
        }
    }
}
