//! Closed-polygon helpers. Polygons are vertex lists without a repeated endpoint.

use num_complex::Complex64;

/// Signed area, positive for counterclockwise polygons.
pub fn polygon_area(p: &[Complex64]) -> f64 {
    let n = p.len();
    (0..n)
        .map(|i| {
            let (a, b) = (p[i], p[(i + 1) % n]);
            a.re * b.im - b.re * a.im
        })
        .sum::<f64>()
        * 0.5
}

pub fn polyline_perimeter(p: &[Complex64]) -> f64 {
    let n = p.len();
    (0..n).map(|i| (p[(i + 1) % n] - p[i]).norm()).sum()
}

/// Crossing-number test; points exactly on an edge may fall either way.
pub fn point_in_polygon(poly: &[Complex64], q: Complex64) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.im > q.im) != (b.im > q.im) {
            let x = a.re + (q.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if q.re < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn segment_distance(a: Complex64, b: Complex64, q: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (q - a).norm();
    }
    let t = (((q - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (a + d * t - q).norm()
}

/// Distance from `q` to the polygon boundary.
pub fn distance_to_polygon(poly: &[Complex64], q: Complex64) -> f64 {
    let n = poly.len();
    (0..n).map(|i| segment_distance(poly[i], poly[(i + 1) % n], q)).fold(f64::INFINITY, f64::min)
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_cross(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let d1 = cross(p2 - p1, q1 - p1);
    let d2 = cross(p2 - p1, q2 - p1);
    let d3 = cross(q2 - q1, p1 - q1);
    let d4 = cross(q2 - q1, p2 - q1);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0
}

/// True when two non-adjacent edges intersect.
pub(crate) fn self_intersects(p: &[Complex64]) -> bool {
    let n = p.len();
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

/// Point at arc length `s` (taken modulo the perimeter) along the closed polyline.
pub(crate) fn point_at_arclength(p: &[Complex64], s: f64) -> Complex64 {
    let n = p.len();
    let per = polyline_perimeter(p);
    let mut s = s.rem_euclid(per);
    for i in 0..n {
        let (a, b) = (p[i], p[(i + 1) % n]);
        let len = (b - a).norm();
        if s <= len {
            return a + (b - a) * (s / len);
        }
        s -= len;
    }
    p[0]
}

/// `count` points equispaced in arc length, starting at vertex 0.
pub(crate) fn resample_by_arclength(p: &[Complex64], count: usize) -> Vec<Complex64> {
    let per = polyline_perimeter(p);
    (0..count).map(|i| point_at_arclength(p, per * i as f64 / count as f64)).collect()
}
