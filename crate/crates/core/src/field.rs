//! Complex fields on a z-grid with a validity mask, and their text format.
//!
//! ```text
//! field <label>
//! grid <n> <h> <origin_re> <origin_im>
//! provenance <free text>
//! <re> <im> <valid>      (n² rows, row-major)
//! ```

use crate::error::{parse_err, Result};
use crate::geometry::ZGrid;
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub label: String,
    pub n: usize,
    pub h: f64,
    pub origin: Complex64,
    pub provenance: String,
    pub values: Vec<Complex64>,
    pub valid: Vec<bool>,
}

impl GridField {
    pub fn new(label: &str, grid: &ZGrid, values: Vec<Complex64>, valid: Vec<bool>) -> Self {
        Self {
            label: label.to_string(),
            n: grid.n,
            h: grid.h,
            origin: grid.origin,
            provenance: String::new(),
            values,
            valid,
        }
    }

    pub fn matches(&self, grid: &ZGrid) -> bool {
        self.n == grid.n && self.h == grid.h && self.origin == grid.origin
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 48);
        let _ = writeln!(out, "field {}", self.label);
        let _ = writeln!(out, "grid {} {} {} {}", self.n, self.h, self.origin.re, self.origin.im);
        let _ = writeln!(out, "provenance {}", self.provenance);
        for (v, ok) in self.values.iter().zip(&self.valid) {
            let _ = writeln!(out, "{} {} {}", v.re, v.im, u8::from(*ok));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ctx = "grid field";
        let mut lines = text.lines();
        let mut header = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| parse_err(ctx, format!("missing '{key}' line")))?;
            let rest = line.strip_prefix(key).ok_or_else(|| parse_err(ctx, format!("expected '{key}'")))?;
            Ok(rest.trim_start().to_string())
        };
        let label = header("field")?;
        let grid = header("grid")?;
        let provenance = header("provenance")?;
        let g: Vec<&str> = grid.split_whitespace().collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| parse_err(ctx, format!("bad number '{s}'")));
        if g.len() != 4 {
            return Err(parse_err(ctx, "malformed grid line"));
        }
        let n: usize = g[0].parse().map_err(|_| parse_err(ctx, format!("bad size '{}'", g[0])))?;
        let (h, origin) = (num(g[1])?, Complex64::new(num(g[2])?, num(g[3])?));
        let mut values = Vec::with_capacity(n * n);
        let mut valid = Vec::with_capacity(n * n);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 3 {
                return Err(parse_err(ctx, format!("bad row '{line}'")));
            }
            values.push(Complex64::new(num(t[0])?, num(t[1])?));
            valid.push(t[2] != "0");
        }
        if values.len() != n * n {
            return Err(parse_err(ctx, format!("expected {} rows, found {}", n * n, values.len())));
        }
        Ok(Self { label, n, h, origin, provenance, values, valid })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
