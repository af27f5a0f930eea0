use super::{distance_to_polygon, point_in_polygon, Domain};
use crate::error::{invalid, Result};
use num_complex::Complex64;

/// Uniform square grid in model units. Index `r * n + c` is the point
/// `origin + c·h + i·r·h` (rows along y, columns along x).
#[derive(Debug, Clone)]
pub struct ZGrid {
    pub n: usize,
    pub h: f64,
    pub origin: Complex64,
    pub omega_mask: Vec<bool>,
    pub omega_plus_mask: Vec<bool>,
    /// mm → model scaling used for the grid.
    pub scale: f64,
    pub padding_fraction: f64,
}

impl ZGrid {
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn point(&self, idx: usize) -> Complex64 {
        let (r, c) = (idx / self.n, idx % self.n);
        self.origin + Complex64::new(c as f64 * self.h, r as f64 * self.h)
    }

    pub fn points(&self) -> Vec<Complex64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Grid points inside a polygon given in mm.
    pub fn polygon_mask(&self, poly_mm: &[Complex64]) -> Vec<bool> {
        let poly: Vec<_> = poly_mm.iter().map(|p| p * self.scale).collect();
        (0..self.len()).map(|i| point_in_polygon(&poly, self.point(i))).collect()
    }

    /// Indices of Ω⁺ points, in grid order.
    pub fn omega_plus_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.omega_plus_mask[i]).collect()
    }
}

pub fn build_zgrid(domain: &Domain, m: u32, padding_fraction: f64) -> Result<ZGrid> {
    if !(5..=10).contains(&m) {
        return invalid(format!("grid exponent m must be in 5..=10, got {m}"));
    }
    if !(padding_fraction >= 0.0) {
        return invalid("padding fraction must be nonnegative");
    }
    let scale = domain.model_scale();
    let poly: Vec<Complex64> = domain.boundary.iter().map(|p| p * scale).collect();
    let pad = padding_fraction * domain.diameter() * scale;
    let (mut lo, mut hi) = (poly[0], poly[0]);
    for p in &poly {
        lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    let center = (lo + hi) * 0.5;
    let half = 0.5 * (hi.re - lo.re).max(hi.im - lo.im) + pad;
    let n = 1usize << m;
    // two spare cells on every side
    let h = 2.0 * half / (n - 5) as f64;
    let origin = center - Complex64::new(half + 2.0 * h, half + 2.0 * h);
    let mut grid = ZGrid { n, h, origin, omega_mask: Vec::new(), omega_plus_mask: Vec::new(), scale, padding_fraction };
    grid.omega_mask = (0..grid.len()).map(|i| point_in_polygon(&poly, grid.point(i))).collect();
    grid.omega_plus_mask = (0..grid.len())
        .map(|i| grid.omega_mask[i] || (pad > 0.0 && distance_to_polygon(&poly, grid.point(i)) <= pad))
        .collect();
    Ok(grid)
}
