//! Scattering transform on a k-grid: boundary integral route from `δΛ`,
//! thresholding, splicing and text persistence.

mod bie;
mod faddeev;
mod kgrid;

pub use bie::{BieSolver, BoundaryTraces};
pub use faddeev::{faddeev_g, faddeev_log_limit};
pub use kgrid::KGrid;

use crate::error::{invalid, parse_err, Error, Result};
use crate::exec::Execution;
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatteringSource {
    Measured,
    Prior,
    Spliced,
}

impl ScatteringSource {
    fn name(self) -> &'static str {
        match self {
            ScatteringSource::Measured => "measured",
            ScatteringSource::Prior => "prior",
            ScatteringSource::Spliced => "spliced",
        }
    }
}

impl FromStr for ScatteringSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "measured" => Ok(Self::Measured),
            "prior" => Ok(Self::Prior),
            "spliced" => Ok(Self::Spliced),
            _ => Err(parse_err("scattering source", format!("unknown source '{s}'"))),
        }
    }
}

/// `S₁₂`, `S₂₁` on a [`KGrid`], zero outside the active set.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData {
    pub grid: KGrid,
    pub s12: Vec<Complex64>,
    pub s21: Vec<Complex64>,
    pub active: Vec<bool>,
    pub source: ScatteringSource,
    /// Truncation radius of the measured part.
    pub radius: f64,
    /// Outer radius (equal to `radius` unless spliced).
    pub radius2: f64,
    pub provenance: String,
}

impl ScatteringData {
    pub fn zeros(grid: KGrid, source: ScatteringSource, radius: f64) -> Self {
        let n = grid.len();
        let zero = Complex64::new(0.0, 0.0);
        Self {
            grid,
            s12: vec![zero; n],
            s21: vec![zero; n],
            active: vec![false; n],
            source,
            radius,
            radius2: radius,
            provenance: String::new(),
        }
    }

    /// `max |S_ij|` over the grid.
    pub fn max_abs(&self) -> f64 {
        self.s12.iter().chain(&self.s21).map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// The same data on the centred sub-grid with `n` points per side and
    /// the same step. Points of `self` outside the sub-grid must be zero.
    pub fn restrict(&self, n: usize) -> Result<Self> {
        let big = self.grid.n;
        if n > big || (big - n) % 2 == 1 {
            return invalid(format!("cannot restrict a {big}-point grid to {n} points"));
        }
        let off = (big - n) / 2;
        let grid = KGrid { n, h: self.grid.h };
        let mut out = Self::zeros(grid, self.source, self.radius);
        out.radius2 = self.radius2;
        out.provenance = self.provenance.clone();
        let inside = |i: usize| {
            let (r, c) = (i / big, i % big);
            (off..off + n).contains(&r) && (off..off + n).contains(&c)
        };
        for i in 0..self.grid.len() {
            if inside(i) {
                let j = (i / big - off) * n + i % big - off;
                out.s12[j] = self.s12[i];
                out.s21[j] = self.s21[i];
                out.active[j] = self.active[i];
            } else if self.active[i]
                || self.s12[i] != Complex64::new(0.0, 0.0)
                || self.s21[i] != Complex64::new(0.0, 0.0)
            {
                return invalid("nonzero scattering outside the sub-grid");
            }
        }
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "source {}", self.source.name());
        let _ = writeln!(out, "grid {} {}", self.grid.n, self.grid.h);
        let _ = writeln!(out, "radius {} {}", self.radius, self.radius2);
        let _ = writeln!(out, "provenance {}", self.provenance);
        for i in 0..self.grid.len() {
            let k = self.grid.point(i);
            let (a, b) = (self.s12[i], self.s21[i]);
            let _ = writeln!(out, "{} {} {} {} {} {} {}", k.re, k.im, a.re, a.im, b.re, b.im, u8::from(self.active[i]));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ctx = "scattering data";
        let mut lines = text.lines().enumerate();
        let mut header = |key: &str| -> Result<String> {
            let (no, line) = lines.next().ok_or_else(|| parse_err(ctx, format!("missing '{key}' line")))?;
            let rest =
                line.strip_prefix(key).ok_or_else(|| parse_err(ctx, format!("line {}: expected '{key}'", no + 1)))?;
            Ok(rest.trim_start().to_string())
        };
        let source: ScatteringSource = header("source")?.parse()?;
        let grid_line = header("grid")?;
        let radius_line = header("radius")?;
        let provenance = header("provenance")?;
        let nums = |s: &str| -> Result<Vec<f64>> {
            s.split_whitespace().map(|t| t.parse().map_err(|_| parse_err(ctx, format!("bad number '{t}'")))).collect()
        };
        let g = nums(&grid_line)?;
        let r = nums(&radius_line)?;
        if g.len() != 2 || r.len() != 2 || g[0] < 2.0 || g[0].fract() != 0.0 {
            return Err(parse_err(ctx, "malformed grid or radius line"));
        }
        let grid = KGrid { n: g[0] as usize, h: g[1] };
        let mut data = Self::zeros(grid, source, r[0]);
        data.radius2 = r[1];
        data.provenance = provenance;
        let mut count = 0;
        for (no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let v = nums(line)?;
            if v.len() != 7 || count >= data.grid.len() {
                return Err(parse_err(ctx, format!("line {}: unexpected row", no + 1)));
            }
            data.s12[count] = Complex64::new(v[2], v[3]);
            data.s21[count] = Complex64::new(v[4], v[5]);
            data.active[count] = v[6] != 0.0;
            count += 1;
        }
        if count != data.grid.len() {
            return Err(parse_err(ctx, format!("expected {} rows, found {count}", data.grid.len())));
        }
        Ok(data)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Boundary-route scattering on `|k| ≤ radius`. Points whose Galerkin system
/// is singular are left inactive and returned in the second component.
pub fn measured_scattering(
    solver: &BieSolver,
    grid: &KGrid,
    radius: f64,
    exec: Execution,
) -> (ScatteringData, Vec<usize>) {
    let mask = grid.disc_mask(radius);
    let idx: Vec<usize> = (0..grid.len()).filter(|&i| mask[i]).collect();
    let values = exec.map(&idx, |&i| solver.scattering_at(grid.point(i)));
    let mut data = ScatteringData::zeros(grid.clone(), ScatteringSource::Measured, radius);
    let mut dropped = Vec::new();
    for (&i, v) in idx.iter().zip(values) {
        match v {
            Ok((a, b)) if a.is_finite() && b.is_finite() => {
                data.s12[i] = a;
                data.s21[i] = b;
                data.active[i] = true;
            }
            _ => dropped.push(i),
        }
    }
    if !dropped.is_empty() {
        log::warn!("{} k points dropped from the boundary scattering", dropped.len());
    }
    (data, dropped)
}

/// Zeroes each entry with `|Re S_ij| > bound` or `|Im S_ij| > bound`.
/// A point is marked inactive once any of its entries is zeroed.
pub fn threshold_scattering(s: &ScatteringData, bound: f64) -> Result<ScatteringData> {
    if !(bound > 0.0) {
        return invalid(format!("threshold bound must be positive, got {bound}"));
    }
    let mut out = s.clone();
    let over = |v: Complex64| v.re.abs() > bound || v.im.abs() > bound;
    let zero = Complex64::new(0.0, 0.0);
    for i in 0..out.s12.len() {
        let (a, b) = (over(out.s12[i]), over(out.s21[i]));
        if a {
            out.s12[i] = zero;
        }
        if b {
            out.s21[i] = zero;
        }
        if a || b {
            out.active[i] = false;
        }
    }
    Ok(out)
}

/// `S_{R,R₂}`: measured values on `|k| ≤ R`, prior values on `R < |k| ≤ R₂`, zero beyond.
pub fn splice_scattering(measured: &ScatteringData, prior: &ScatteringData, r2: f64) -> Result<ScatteringData> {
    let r = measured.radius;
    if r > r2 {
        return invalid(format!("measured radius {r} exceeds outer radius {r2}"));
    }
    if measured.grid != prior.grid {
        return invalid("measured and prior scattering use different k-grids");
    }
    let grid = &measured.grid;
    let mut out = ScatteringData::zeros(grid.clone(), ScatteringSource::Spliced, r);
    out.radius2 = r2;
    for i in 0..grid.len() {
        let kn = grid.point(i).norm();
        if kn <= r {
            out.s12[i] = measured.s12[i];
            out.s21[i] = measured.s21[i];
            out.active[i] = measured.active[i];
        } else if kn <= r2 {
            out.s12[i] = prior.s12[i];
            out.s21[i] = prior.s21[i];
            out.active[i] = prior.active[i];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(grid: &KGrid) -> ScatteringData {
        let mut s = ScatteringData::zeros(grid.clone(), ScatteringSource::Measured, 2.0);
        for i in 0..grid.len() {
            let k = grid.point(i);
            if k.norm() <= 2.0 {
                s.s12[i] = Complex64::new(0.1 * k.re, -0.3 * k.im);
                s.s21[i] = Complex64::new(0.05 * k.im, 0.2 * k.re);
                s.active[i] = true;
            }
        }
        s
    }

    #[test]
    fn text_round_trip() {
        let grid = KGrid::covering(3, 2.5);
        let mut s = sample(&grid);
        s.provenance = "abc 123".into();
        let back = ScatteringData::parse(&s.to_text()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn restrict_keeps_points() {
        let big = KGrid::with_step(0.25, 4.0);
        let s = sample(&big);
        let small = KGrid::with_step(0.25, 2.0);
        let r = s.restrict(small.n).unwrap();
        assert_eq!(r.active_count(), s.active_count());
        for i in 0..small.len() {
            let k = small.point(i);
            let j = (0..big.len()).find(|&j| big.point(j) == k).unwrap();
            assert_eq!((r.s12[i], r.s21[i], r.active[i]), (s.s12[j], s.s21[j], s.active[j]));
        }
        assert!(s.restrict(4).is_err());
    }

    #[test]
    fn threshold_is_pointwise() {
        let grid = KGrid::covering(3, 2.5);
        let s = sample(&grid);
        let t = threshold_scattering(&s, 0.15).unwrap();
        for i in 0..grid.len() {
            let over = |v: Complex64| v.re.abs() > 0.15 || v.im.abs() > 0.15;
            let expect12 = if over(s.s12[i]) { Complex64::new(0.0, 0.0) } else { s.s12[i] };
            let expect21 = if over(s.s21[i]) { Complex64::new(0.0, 0.0) } else { s.s21[i] };
            assert_eq!(t.s12[i], expect12);
            assert_eq!(t.s21[i], expect21);
        }
        let same = threshold_scattering(&s, f64::INFINITY).unwrap();
        assert_eq!(same, s);
        assert!(threshold_scattering(&s, 0.0).is_err());
    }

    #[test]
    fn splice_cases() {
        let grid = KGrid::covering(4, 4.0);
        let m = sample(&grid);
        let mut p = ScatteringData::zeros(grid.clone(), ScatteringSource::Prior, 4.0);
        for i in 0..grid.len() {
            p.s12[i] = Complex64::new(1.0, 1.0);
            p.active[i] = grid.point(i).norm() <= 4.0;
        }
        let same = splice_scattering(&m, &p, 2.0).unwrap();
        assert_eq!(same.s12, m.s12);
        assert_eq!(same.s21, m.s21);
        let s = splice_scattering(&m, &p, 3.0).unwrap();
        for i in 0..grid.len() {
            let kn = grid.point(i).norm();
            let expect = if kn <= 2.0 {
                m.s12[i]
            } else if kn <= 3.0 {
                Complex64::new(1.0, 1.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            assert_eq!(s.s12[i], expect);
        }
        let twice = splice_scattering(&s, &p, 3.0).unwrap();
        assert_eq!(twice.s12, s.s12);
        assert!(splice_scattering(&m, &p, 1.0).is_err());
    }
}
