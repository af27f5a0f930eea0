//! Piecewise-constant admittivity phantoms and labeled polygon files.

use crate::error::{parse_err, Result};
use crate::geometry::{point_in_polygon, TriMesh, ZGrid};
use num_complex::Complex64;
use std::fmt::Write as _;

/// A labeled closed polygon in mm.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub label: String,
    pub polygon: Vec<Complex64>,
}

impl Region {
    pub fn contains(&self, p: Complex64) -> bool {
        point_in_polygon(&self.polygon, p)
    }
}

/// Parses `polygon <label> <count>` blocks followed by `x y` lines.
pub fn parse_regions(text: &str) -> Result<Vec<Region>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut regions = Vec::new();
    while let Some((no, head)) = lines.next() {
        let f: Vec<&str> = head.split_whitespace().collect();
        let bad = |msg: &str| parse_err(format!("region file line {no}"), msg.to_string());
        if f.len() != 3 || f[0] != "polygon" {
            return Err(bad("expected `polygon <label> <count>`"));
        }
        let count: usize = f[2].parse().map_err(|_| bad("bad vertex count"))?;
        if count < 3 {
            return Err(bad("polygon needs at least 3 vertices"));
        }
        let mut polygon = Vec::with_capacity(count);
        for _ in 0..count {
            let (no, l) = lines.next().ok_or_else(|| bad("truncated polygon"))?;
            let xy: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| parse_err(format!("region file line {no}"), "bad coordinate"))?;
            if xy.len() != 2 {
                return Err(parse_err(format!("region file line {no}"), "expected `x y`"));
            }
            polygon.push(Complex64::new(xy[0], xy[1]));
        }
        regions.push(Region { label: f[1].to_string(), polygon });
    }
    Ok(regions)
}

pub fn format_regions(regions: &[Region]) -> String {
    let mut s = String::from("# labeled polygons, mm\n");
    for r in regions {
        writeln!(s, "polygon {} {}", r.label, r.polygon.len()).unwrap();
        for p in &r.polygon {
            writeln!(s, "{} {}", p.re, p.im).unwrap();
        }
    }
    s
}

const PNEUMOTHORAX: &str = include_str!("../../data/chest_pneumothorax.txt");
const EFFUSION: &str = include_str!("../../data/chest_effusion.txt");
const PRIOR_REGIONS: &str = include_str!("../../data/chest_prior_regions.txt");

/// Perimeter the built-in chest region files are drawn for.
pub const CHEST_REFERENCE_PERIMETER: f64 = 1016.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pathology {
    None,
    Pneumothorax,
    Effusion,
}

impl std::str::FromStr for Pathology {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Pathology::None),
            "pneumothorax" => Ok(Pathology::Pneumothorax),
            "effusion" => Ok(Pathology::Effusion),
            other => Err(crate::Error::Invalid(format!("unknown pathology `{other}`"))),
        }
    }
}

fn scaled(regions: Vec<Region>, s: f64) -> Vec<Region> {
    regions
        .into_iter()
        .map(|r| Region { label: r.label, polygon: r.polygon.into_iter().map(|p| p * s).collect() })
        .collect()
}

/// True organ and pathology outlines for a chest of the given perimeter.
pub fn chest_truth_regions(pathology: Pathology, perimeter_mm: f64) -> Vec<Region> {
    let text = if pathology == Pathology::Effusion { EFFUSION } else { PNEUMOTHORAX };
    let mut regions = parse_regions(text).expect("built-in region file is well formed");
    if pathology == Pathology::None {
        regions.retain(|r| r.label != "pathology");
    }
    scaled(regions, perimeter_mm / CHEST_REFERENCE_PERIMETER)
}

/// Approximate organ outlines used to build the spatial prior.
pub fn chest_prior_regions(perimeter_mm: f64) -> Vec<Region> {
    let regions = parse_regions(PRIOR_REGIONS).expect("built-in region file is well formed");
    scaled(regions, perimeter_mm / CHEST_REFERENCE_PERIMETER)
}

/// Admittivity values per region label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TissueValues {
    pub background: Complex64,
    pub heart: Complex64,
    pub lung: Complex64,
    pub pathology: Complex64,
}

impl TissueValues {
    pub fn for_pathology(p: Pathology) -> Self {
        let c = Complex64::new;
        let pathology = match p {
            Pathology::Effusion => c(1.1, 0.6),
            _ => c(0.25, 0.0),
        };
        Self { background: c(0.8, 0.4), heart: c(1.1, 0.6), lung: c(0.5, 0.2), pathology }
    }

    pub fn value(&self, label: &str) -> Option<Complex64> {
        match label {
            "background" => Some(self.background),
            "heart" => Some(self.heart),
            "left-lung" | "right-lung" | "lung" => Some(self.lung),
            "pathology" => Some(self.pathology),
            _ => None,
        }
    }
}

/// Background value plus regions; later regions override earlier ones.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub background: Complex64,
    pub regions: Vec<(Region, Complex64)>,
}

impl PhantomSpec {
    pub fn homogeneous(value: Complex64) -> Self {
        Self { background: value, regions: Vec::new() }
    }

    pub fn chest(pathology: Pathology, values: &TissueValues, perimeter_mm: f64) -> Self {
        let regions = chest_truth_regions(pathology, perimeter_mm)
            .into_iter()
            .map(|r| {
                let v = values.value(&r.label).unwrap_or(values.background);
                (r, v)
            })
            .collect();
        Self { background: values.background, regions }
    }

    /// Value at a point in mm.
    pub fn value_at(&self, p: Complex64) -> Complex64 {
        self.regions.iter().rev().find(|(r, _)| r.contains(p)).map_or(self.background, |(_, v)| *v)
    }

    /// Per-triangle admittivity sampled at centroids.
    pub fn on_mesh(&self, mesh: &TriMesh) -> Vec<Complex64> {
        (0..mesh.triangles.len())
            .map(|t| {
                let c = mesh.centroid(t);
                self.value_at(Complex64::new(c[0], c[1]))
            })
            .collect()
    }

    /// Grid samples; points outside Ω get `outside`.
    pub fn on_grid(&self, grid: &ZGrid, outside: Complex64) -> Vec<Complex64> {
        (0..grid.len())
            .map(|i| if grid.omega_mask[i] { self.value_at(grid.point(i) / grid.scale) } else { outside })
            .collect()
    }

    /// Regions carrying a given label.
    pub fn region(&self, label: &str) -> Option<&Region> {
        self.regions.iter().map(|(r, _)| r).find(|r| r.label == label)
    }

    /// Stable text form used for provenance hashing.
    pub fn canonical_text(&self) -> String {
        let mut s = format!("background {} {}\n", self.background.re, self.background.im);
        for (r, v) in &self.regions {
            writeln!(s, "value {} {}", v.re, v.im).unwrap();
            s.push_str(&format_regions(std::slice::from_ref(r)));
        }
        s
    }
}
