//! Domains, electrodes, FEM meshes and reconstruction grids.

mod curve;
mod electrodes;
mod mesh;
mod polygon;
mod zgrid;

pub use curve::{BoundaryCurve, FourierCurve};
pub use electrodes::{place_electrodes, Electrode, ElectrodeLayout};
pub use mesh::{mesh_domain, mesh_to_text, parse_mesh, read_mesh, write_mesh, TriMesh};
pub use polygon::{distance_to_polygon, point_in_polygon, polygon_area, polyline_perimeter};
pub use zgrid::{build_zgrid, ZGrid};

use crate::error::{invalid, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Disc,
    Chest,
    Polygon,
}

impl std::str::FromStr for DomainKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disc" => Ok(DomainKind::Disc),
            "chest" => Ok(DomainKind::Chest),
            "polygon" => Ok(DomainKind::Polygon),
            other => invalid(format!("unsupported domain kind `{other}`")),
        }
    }
}

/// Closed counterclockwise boundary in mm. The first vertex is not repeated.
#[derive(Debug, Clone)]
pub struct Domain {
    pub kind: DomainKind,
    pub boundary: Vec<Complex64>,
    /// Nominal perimeter in mm (of the smooth curve when there is one).
    pub perimeter: f64,
    curve: Option<FourierCurve>,
}

impl Domain {
    /// Wraps a user polygon; orientation is normalized to counterclockwise.
    pub fn from_polygon(mut boundary: Vec<Complex64>) -> Result<Self> {
        if boundary.len() < 3 {
            return invalid("polygon needs at least 3 vertices");
        }
        if boundary.first() == boundary.last() {
            boundary.pop();
        }
        if polygon_area(&boundary) < 0.0 {
            boundary.reverse();
        }
        if polygon::self_intersects(&boundary) {
            return invalid("polygon boundary self-intersects");
        }
        let perimeter = polyline_perimeter(&boundary);
        Ok(Self { kind: DomainKind::Polygon, boundary, perimeter, curve: None })
    }

    /// Smooth periodic parametrization of the boundary in mm.
    pub fn smooth_curve(&self) -> FourierCurve {
        match &self.curve {
            Some(c) => c.clone(),
            None => FourierCurve::interpolate(&polygon::resample_by_arclength(&self.boundary, 512)),
        }
    }

    /// Factor converting mm to model units in which the boundary has length 2π.
    pub fn model_scale(&self) -> f64 {
        2.0 * PI / self.perimeter
    }

    pub fn contains(&self, p: Complex64) -> bool {
        point_in_polygon(&self.boundary, p)
    }

    /// Largest vertex-to-vertex distance.
    pub fn diameter(&self) -> f64 {
        let b = &self.boundary;
        let mut d: f64 = 0.0;
        for (i, p) in b.iter().enumerate() {
            for q in &b[i + 1..] {
                d = d.max((p - q).norm());
            }
        }
        d
    }

    /// Point on the boundary polyline at arc length `s` from vertex 0.
    pub fn point_at(&self, s: f64) -> Complex64 {
        polygon::point_at_arclength(&self.boundary, s)
    }

    pub fn polyline_perimeter(&self) -> f64 {
        polyline_perimeter(&self.boundary)
    }
}

const CHEST_OUTLINE: &str = include_str!("../../data/chest_outline.txt");

/// The built-in chest outline as Fourier descriptors, in arbitrary units.
pub fn chest_descriptors() -> FourierCurve {
    FourierCurve::parse(CHEST_OUTLINE).expect("built-in chest outline is well formed")
}

pub fn build_domain(kind: DomainKind, perimeter_mm: f64, vertex_count: usize) -> Result<Domain> {
    if !(perimeter_mm > 0.0) || !perimeter_mm.is_finite() {
        return invalid(format!("degenerate perimeter {perimeter_mm}"));
    }
    if vertex_count < 16 {
        return invalid(format!("vertex_count must be at least 16, got {vertex_count}"));
    }
    let curve = match kind {
        DomainKind::Disc => FourierCurve::circle(perimeter_mm / (2.0 * PI)),
        DomainKind::Chest => {
            let raw = chest_descriptors();
            let s = perimeter_mm / raw.perimeter();
            raw.scaled(s)
        }
        DomainKind::Polygon => return invalid("polygon domains are built with Domain::from_polygon"),
    };
    let boundary = curve.sample_by_arclength(vertex_count);
    Ok(Domain { kind, boundary, perimeter: curve.perimeter(), curve: Some(curve) })
}
