//! Boundary-conforming triangular meshes and their text format.

use super::{Domain, ElectrodeLayout};
use crate::error::{invalid, parse_err, Error, Result};
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};
use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    /// Vertex coordinates, mm.
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// `(a, b, tag)` with tag 0 for gaps and `ℓ + 1` for electrode `ℓ`.
    pub boundary_edges: Vec<(usize, usize, u32)>,
}

impl TriMesh {
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Longest triangle edge in the mesh.
    pub fn max_diameter(&self) -> f64 {
        let d = |p: [f64; 2], q: [f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                d(a, b).max(d(b, c)).max(d(c, a))
            })
            .fold(0.0, f64::max)
    }

    pub fn electrode_count(&self) -> usize {
        self.boundary_edges.iter().map(|e| e.2 as usize).max().unwrap_or(0)
    }

    /// Checks indices, orientation, and that boundary edges are exactly the
    /// edges used by a single triangle.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        let mut edge_use = std::collections::HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::Geometry(format!("triangle {t} has an out-of-range vertex")));
            }
            if self.triangle_area(t) <= 0.0 {
                return Err(Error::Geometry(format!("triangle {t} has nonpositive area")));
            }
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edge_use.entry((a.min(b), a.max(b))).or_insert(0u32) += 1;
            }
        }
        let outer: HashSet<_> = edge_use.iter().filter(|(_, &c)| c == 1).map(|(e, _)| *e).collect();
        if edge_use.values().any(|&c| c > 2) {
            return Err(Error::Geometry("non-conforming mesh: edge shared by more than two triangles".into()));
        }
        let tagged: HashSet<_> = self.boundary_edges.iter().map(|&(a, b, _)| (a.min(b), a.max(b))).collect();
        if tagged != outer {
            return Err(Error::Geometry(format!(
                "boundary edge list ({}) does not match the mesh boundary ({})",
                tagged.len(),
                outer.len()
            )));
        }
        Ok(())
    }
}

/// Arc-length breakpoints along the polyline with their electrode tags.
fn boundary_points(domain: &Domain, layout: &ElectrodeLayout, target_h: f64) -> Vec<(f64, u32)> {
    let poly_per = domain.polyline_perimeter();
    let to_poly = poly_per / layout.perimeter;
    let mut breaks: Vec<(f64, bool)> = Vec::new();
    for l in 0..layout.count() {
        let (a, b) = layout.arc(l);
        breaks.push(((a * to_poly).rem_euclid(poly_per), true));
        breaks.push(((b * to_poly).rem_euclid(poly_per), false));
    }
    breaks.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut pts = Vec::new();
    for (i, &(s0, starts_electrode)) in breaks.iter().enumerate() {
        let s1 = if i + 1 < breaks.len() { breaks[i + 1].0 } else { breaks[0].0 + poly_per };
        let len = s1 - s0;
        // electrodes are meshed at half the spacing and with at least 2 edges
        let (h, min_edges) = if starts_electrode { (0.5 * target_h, 2) } else { (target_h, 1) };
        let n = ((len / h).ceil() as usize).max(min_edges);
        for k in 0..n {
            pts.push((s0 + len * k as f64 / n as f64, 0));
        }
    }
    // tag each segment by the electrode containing its midpoint
    let count = pts.len();
    for i in 0..count {
        let s0 = pts[i].0;
        let s1 = if i + 1 < count { pts[i + 1].0 } else { pts[0].0 + poly_per };
        let mid = 0.5 * (s0 + s1) / to_poly;
        pts[i].1 = layout.electrode_at(mid).map_or(0, |l| l as u32 + 1);
    }
    pts
}

/// Constrained Delaunay mesh with the electrode endpoints as boundary vertices.
pub fn mesh_domain(domain: &Domain, layout: &ElectrodeLayout, target_h: f64) -> Result<TriMesh> {
    if !(target_h > 0.0) {
        return invalid("target_h must be positive");
    }
    let min_electrode = layout.electrodes.iter().map(|e| e.length).fold(f64::INFINITY, f64::min);
    if target_h > min_electrode {
        return invalid(format!("target_h {target_h} too coarse for electrodes of length {min_electrode}"));
    }
    let bpts = boundary_points(domain, layout, target_h);
    let nb = bpts.len();
    let verts: Vec<Point2<f64>> = bpts
        .iter()
        .map(|&(s, _)| {
            let p = domain.point_at(s);
            Point2::new(p.re, p.im)
        })
        .collect();
    let edges: Vec<[usize; 2]> = (0..nb).map(|i| [i, (i + 1) % nb]).collect();
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(verts, edges)
        .map_err(|e| Error::Geometry(format!("triangulation failed: {e:?}")))?;
    if cdt.num_vertices() != nb {
        return Err(Error::Geometry("degenerate boundary: duplicate vertices".into()));
    }
    let max_area = 3f64.sqrt() / 4.0 * target_h * target_h;
    let result = cdt.refine(
        RefinementParameters::<f64>::new()
            .with_max_allowed_area(max_area)
            .with_angle_limit(AngleLimit::from_deg(25.0))
            .exclude_outer_faces(true)
            .keep_constraint_edges()
            .with_max_additional_vertices(2_000_000),
    );
    if !result.refinement_complete {
        return Err(Error::Geometry("mesh refinement did not complete".into()));
    }
    let excluded: HashSet<_> = result.excluded_faces.iter().copied().collect();
    let mut used = vec![false; cdt.num_vertices()];
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let tri = face.vertices().map(|v| v.fix().index());
        for &i in &tri {
            used[i] = true;
        }
        triangles.push(tri);
    }
    // compact away any vertex not referenced by an inner triangle
    let mut remap = vec![usize::MAX; used.len()];
    let mut vertices = Vec::new();
    for v in cdt.vertices() {
        let i = v.fix().index();
        if used[i] {
            remap[i] = vertices.len();
            let p = v.position();
            vertices.push([p.x, p.y]);
        }
    }
    for t in triangles.iter_mut() {
        *t = t.map(|i| remap[i]);
    }
    let boundary_edges = (0..nb).map(|i| (remap[i], remap[(i + 1) % nb], bpts[i].1)).collect();
    let mesh = TriMesh { vertices, triangles, boundary_edges };
    mesh.validate()?;
    Ok(mesh)
}

pub fn mesh_to_text(mesh: &TriMesh) -> String {
    let mut s = String::new();
    writeln!(s, "vertices {}", mesh.vertices.len()).unwrap();
    for v in &mesh.vertices {
        writeln!(s, "{} {}", v[0], v[1]).unwrap();
    }
    writeln!(s, "triangles {}", mesh.triangles.len()).unwrap();
    for t in &mesh.triangles {
        writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(s, "boundary_edges {}", mesh.boundary_edges.len()).unwrap();
    for e in &mesh.boundary_edges {
        writeln!(s, "{} {} {}", e.0, e.1, e.2).unwrap();
    }
    s
}

pub fn write_mesh(mesh: &TriMesh, path: &Path) -> Result<()> {
    std::fs::write(path, mesh_to_text(mesh))?;
    Ok(())
}

pub fn parse_mesh(text: &str) -> Result<TriMesh> {
    let mut lines = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty());
    fn section<'a>(lines: &mut impl Iterator<Item = &'a str>, name: &str) -> Result<usize> {
        let line = lines.next().ok_or_else(|| parse_err("mesh", format!("missing `{name}` section")))?;
        let mut f = line.split_whitespace();
        if f.next() != Some(name) {
            return Err(parse_err("mesh", format!("expected `{name} <count>`, got `{line}`")));
        }
        f.next().and_then(|c| c.parse().ok()).ok_or_else(|| parse_err("mesh", format!("bad count in `{line}`")))
    }
    fn fields<'a, T: std::str::FromStr, const N: usize>(
        lines: &mut impl Iterator<Item = &'a str>,
        what: &str,
    ) -> Result<[T; N]> {
        let line = lines.next().ok_or_else(|| parse_err("mesh", format!("truncated {what} list")))?;
        let vals: Vec<T> = line
            .split_whitespace()
            .map(|t| t.parse::<T>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err("mesh", format!("bad {what} line `{line}`")))?;
        vals.try_into().map_err(|_| parse_err("mesh", format!("{what} line `{line}` needs {N} fields")))
    }
    let nv = section(&mut lines, "vertices")?;
    let vertices = (0..nv).map(|_| fields::<f64, 2>(&mut lines, "vertex")).collect::<Result<Vec<_>>>()?;
    let nt = section(&mut lines, "triangles")?;
    let triangles = (0..nt).map(|_| fields::<usize, 3>(&mut lines, "triangle")).collect::<Result<Vec<_>>>()?;
    let ne = section(&mut lines, "boundary_edges")?;
    let boundary_edges = (0..ne)
        .map(|_| fields::<usize, 3>(&mut lines, "boundary edge").map(|[a, b, t]| (a, b, t as u32)))
        .collect::<Result<Vec<_>>>()?;
    let mesh = TriMesh { vertices, triangles, boundary_edges };
    mesh.validate()?;
    Ok(mesh)
}

pub fn read_mesh(path: &Path) -> Result<TriMesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}
