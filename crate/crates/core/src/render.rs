//! Heatmaps of the conductivity (Re γ) and permittivity (Im γ) parts of a
//! grid field, with a colorbar and optional region outlines.
//!
//! Points outside Ω are white. Invalid points inside Ω take the value of the
//! nearest valid point. The PNG carries `tEXt` chunks `config-hash`, `part`,
//! `vmin` and `vmax`.

use crate::error::{invalid, Error, Result};
use crate::field::GridField;
use crate::geometry::ZGrid;
use num_complex::Complex64;
use std::path::Path;

/// Pixels per grid cell.
pub const CELL: usize = 6;
const BAR_GAP: usize = 8;
const BAR_WIDTH: usize = 16;
/// Half-width of the color limits of a constant field.
pub const FLAT_EPS: f64 = 1e-6;

const WHITE: [u8; 3] = [255, 255, 255];
const BLACK: [u8; 3] = [0, 0, 0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Conductivity,
    Permittivity,
}

impl Part {
    pub fn of(self, v: Complex64) -> f64 {
        match self {
            Part::Conductivity => v.re,
            Part::Permittivity => v.im,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Part::Conductivity => "conductivity",
            Part::Permittivity => "permittivity",
        }
    }
}

/// Viridis sampled at nine stops.
const STOPS: [[f64; 3]; 9] = [
    [68.0, 1.0, 84.0],
    [72.0, 40.0, 120.0],
    [62.0, 74.0, 137.0],
    [49.0, 104.0, 142.0],
    [38.0, 130.0, 142.0],
    [31.0, 158.0, 137.0],
    [53.0, 183.0, 121.0],
    [109.0, 205.0, 89.0],
    [253.0, 231.0, 37.0],
];

/// Color of `t ∈ [0, 1]`; values outside are clamped.
pub fn colormap(t: f64) -> [u8; 3] {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let x = t * (STOPS.len() - 1) as f64;
    let i = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - i as f64;
    let mut out = [0u8; 3];
    for (c, o) in out.iter_mut().enumerate() {
        *o = (STOPS[i][c] + f * (STOPS[i + 1][c] - STOPS[i][c])).round() as u8;
    }
    out
}

/// Values with invalid points replaced by their nearest valid neighbour on Ω.
pub fn fill_invalid(field: &GridField, omega: &[bool]) -> Result<Vec<Complex64>> {
    let n = field.n;
    let valid: Vec<usize> = (0..n * n).filter(|&i| omega[i] && field.valid[i] && field.values[i].is_finite()).collect();
    if valid.is_empty() {
        return invalid(format!("field '{}' has no valid points", field.label));
    }
    let mut out = field.values.clone();
    for i in (0..n * n).filter(|&i| omega[i] && !(field.valid[i] && field.values[i].is_finite())) {
        let (r, c) = ((i / n) as i64, (i % n) as i64);
        let nearest = valid
            .iter()
            .min_by_key(|&&j| {
                let (dr, dc) = ((j / n) as i64 - r, (j % n) as i64 - c);
                (dr * dr + dc * dc, j)
            })
            .expect("nonempty");
        out[i] = field.values[*nearest];
    }
    Ok(out)
}

/// `(min, max)` of one part over Ω, widened by [`FLAT_EPS`] when constant.
pub fn limits(values: &[Complex64], omega: &[bool], part: Part) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (v, _) in values.iter().zip(omega).filter(|(v, &o)| o && v.is_finite()) {
        lo = lo.min(part.of(*v));
        hi = hi.max(part.of(*v));
    }
    if !lo.is_finite() {
        return invalid("no finite values inside the domain");
    }
    if hi - lo < FLAT_EPS {
        let mid = 0.5 * (lo + hi);
        return Ok((mid - FLAT_EPS, mid + FLAT_EPS));
    }
    Ok((lo, hi))
}

/// Shared limits of several fields, for side-by-side comparison.
pub fn common_limits(fields: &[&GridField], grid: &ZGrid, part: Part) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for f in fields {
        let (a, b) = limits(&fill_invalid(f, &grid.omega_mask)?, &grid.omega_mask, part)?;
        lo = lo.min(a);
        hi = hi.max(b);
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// RGB, row-major from the top.
    pub pixels: Vec<u8>,
    pub vmin: f64,
    pub vmax: f64,
}

impl Image {
    fn set(&mut self, x: usize, y: usize, c: [u8; 3]) {
        if x < self.width && y < self.height {
            let k = 3 * (y * self.width + x);
            self.pixels[k..k + 3].copy_from_slice(&c);
        }
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let k = 3 * (y * self.width + x);
        [self.pixels[k], self.pixels[k + 1], self.pixels[k + 2]]
    }

    /// PNG bytes with the config hash and the color limits as text chunks.
    pub fn encode_png(&self, config_hash: &str, part: Part) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        let mut enc = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let png_err = |e: png::EncodingError| Error::Invalid(format!("png: {e}"));
        for (k, v) in [
            ("config-hash", config_hash.to_string()),
            ("part", part.name().to_string()),
            ("vmin", self.vmin.to_string()),
            ("vmax", self.vmax.to_string()),
        ] {
            enc.add_text_chunk(k.to_string(), v).map_err(png_err)?;
        }
        let mut w = enc.write_header().map_err(png_err)?;
        w.write_image_data(&self.pixels).map_err(png_err)?;
        w.finish().map_err(png_err)?;
        Ok(out)
    }

    pub fn write_png(&self, path: &Path, config_hash: &str, part: Part) -> Result<()> {
        std::fs::write(path, self.encode_png(config_hash, part)?)?;
        Ok(())
    }
}

/// Heatmap of one part of `field` with a vertical colorbar on the right.
/// `outlines` are polygons in mm drawn in black.
pub fn render(
    field: &GridField,
    grid: &ZGrid,
    part: Part,
    limits_override: Option<(f64, f64)>,
    outlines: &[Vec<Complex64>],
) -> Result<Image> {
    if field.values.is_empty() {
        return invalid("empty grid");
    }
    if !field.matches(grid) {
        return invalid(format!("field '{}' does not match the grid", field.label));
    }
    let n = grid.n;
    let values = fill_invalid(field, &grid.omega_mask)?;
    let (vmin, vmax) = match limits_override {
        Some(l) => l,
        None => limits(&values, &grid.omega_mask, part)?,
    };
    let side = n * CELL;
    let width = side + BAR_GAP + BAR_WIDTH;
    let mut img = Image { width, height: side, pixels: vec![255; width * side * 3], vmin, vmax };
    let t = |v: f64| (v - vmin) / (vmax - vmin);
    for i in 0..n * n {
        let color = if grid.omega_mask[i] { colormap(t(part.of(values[i]))) } else { WHITE };
        let (r, c) = (i / n, i % n);
        let y0 = (n - 1 - r) * CELL;
        for y in y0..y0 + CELL {
            for x in c * CELL..(c + 1) * CELL {
                img.set(x, y, color);
            }
        }
    }
    for y in 0..side {
        let color = colormap(1.0 - y as f64 / (side - 1).max(1) as f64);
        for x in side + BAR_GAP..width {
            img.set(x, y, color);
        }
    }
    for poly in outlines {
        let px: Vec<(f64, f64)> = poly
            .iter()
            .map(|p| {
                let z = p * grid.scale - grid.origin;
                ((z.re / grid.h + 0.5) * CELL as f64, ((n - 1) as f64 - z.im / grid.h + 0.5) * CELL as f64)
            })
            .collect();
        for k in 0..px.len() {
            draw_line(&mut img, px[k], px[(k + 1) % px.len()]);
        }
    }
    Ok(img)
}

fn draw_line(img: &mut Image, a: (f64, f64), b: (f64, f64)) {
    let steps = ((b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil() as usize).max(1);
    for s in 0..=steps {
        let f = s as f64 / steps as f64;
        let (x, y) = (a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1));
        if x >= 0.0 && y >= 0.0 {
            img.set(x as usize, y as usize, BLACK);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_ends() {
        assert_eq!(colormap(0.0), [68, 1, 84]);
        assert_eq!(colormap(1.0), [253, 231, 37]);
        assert_eq!(colormap(2.0), colormap(1.0));
        assert_eq!(colormap(-1.0), colormap(0.0));
    }

    #[test]
    fn flat_limits_are_widened() {
        let v = vec![Complex64::new(0.7, 0.1); 4];
        let (lo, hi) = limits(&v, &[true; 4], Part::Conductivity).unwrap();
        assert!((lo - (0.7 - FLAT_EPS)).abs() < 1e-15 && (hi - (0.7 + FLAT_EPS)).abs() < 1e-15);
    }
}
