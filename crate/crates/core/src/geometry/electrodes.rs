use super::Domain;
use crate::error::{invalid, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Electrode {
    /// Arc-length position of the center, mm from boundary vertex 0.
    pub center: f64,
    pub length: f64,
    pub height: f64,
}

impl Electrode {
    pub fn area(&self) -> f64 {
        self.length * self.height
    }
}

#[derive(Debug, Clone)]
pub struct ElectrodeLayout {
    pub electrodes: Vec<Electrode>,
    /// Contact impedance per electrode, model units.
    pub contact: Vec<Complex64>,
    /// Perimeter the arc-length positions refer to, mm.
    pub perimeter: f64,
}

impl ElectrodeLayout {
    pub fn count(&self) -> usize {
        self.electrodes.len()
    }

    /// `(start, end)` arc lengths of electrode `l`; `start` may be negative.
    pub fn arc(&self, l: usize) -> (f64, f64) {
        let e = &self.electrodes[l];
        (e.center - 0.5 * e.length, e.center + 0.5 * e.length)
    }

    /// Electrode covering arc length `s`, if any.
    pub fn electrode_at(&self, s: f64) -> Option<usize> {
        let p = self.perimeter;
        self.electrodes.iter().position(|e| {
            let d = (s - e.center).rem_euclid(p);
            let d = d.min(p - d);
            d <= 0.5 * e.length
        })
    }

    pub fn coverage(&self) -> f64 {
        self.electrodes.iter().map(|e| e.length).sum()
    }
}

/// Equispaced electrodes with centers at arc length `ℓ·P/L`, `ℓ = 1..=L`.
pub fn place_electrodes(
    domain: &Domain,
    count: usize,
    length_mm: f64,
    height_mm: f64,
    contact: Complex64,
) -> Result<ElectrodeLayout> {
    if count == 0 || count % 2 == 1 {
        return invalid(format!("electrode count must be even and positive, got {count}"));
    }
    if !(length_mm > 0.0 && height_mm > 0.0) {
        return invalid("electrode length and height must be positive");
    }
    let p = domain.perimeter;
    if count as f64 * length_mm >= p {
        return invalid(format!("electrodes overlap: {count} × {length_mm} mm does not fit in perimeter {p:.1} mm"));
    }
    let electrodes = (1..=count)
        .map(|l| Electrode { center: p * l as f64 / count as f64, length: length_mm, height: height_mm })
        .collect();
    Ok(ElectrodeLayout { electrodes, contact: vec![contact; count], perimeter: p })
}
