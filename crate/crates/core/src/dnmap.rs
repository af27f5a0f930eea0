//! Discrete ND/DN maps in the normalized trigonometric current basis.

use crate::error::{invalid, parse_err, Error, Result};
use crate::exec::Execution;
use crate::forward::{trig_patterns, CemModel, CurrentFrame, VoltageFrame};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapForm {
    /// Neumann-to-Dirichlet (current → voltage).
    Nd,
    /// Dirichlet-to-Neumann (voltage → current).
    Dn,
}

/// Square complex matrix acting on coefficients in the normalized pattern basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DnMap {
    pub form: MapForm,
    pub size: usize,
    /// Row-major entries.
    pub matrix: Vec<Complex64>,
    pub gamma0: Complex64,
    /// Factor multiplying `Σ t v`; the electrode pitch `2π/L` in model units.
    pub weight: f64,
    pub provenance: String,
}

impl DnMap {
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.matrix[m * self.size + n]
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.size, self.size, &self.matrix)
    }

    fn with_matrix(&self, form: MapForm, m: &DMatrix<Complex64>) -> Self {
        let size = m.nrows();
        let matrix = (0..size).flat_map(|i| (0..size).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect();
        Self { form, size, matrix, ..self.clone() }
    }

    pub fn frobenius(&self) -> f64 {
        self.matrix.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖A − Aᵀ‖_F / ‖A‖_F`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.size;
        let mut d = 0.0;
        for i in 0..n {
            for j in 0..n {
                d += (self.get(i, j) - self.get(j, i)).norm_sqr();
            }
        }
        d.sqrt() / self.frobenius()
    }

    /// Entrywise difference `self − other` (same form and size).
    pub fn difference(&self, other: &DnMap) -> Result<DnMap> {
        if self.size != other.size || self.form != other.form {
            return invalid("maps differ in size or form");
        }
        let matrix = self.matrix.iter().zip(&other.matrix).map(|(a, b)| a - b).collect();
        Ok(DnMap { matrix, ..self.clone() })
    }

    pub fn scaled(&self, s: Complex64) -> DnMap {
        DnMap { matrix: self.matrix.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# dbar-eit boundary map, row-major complex entries\n");
        let form = match self.form {
            MapForm::Nd => "nd",
            MapForm::Dn => "dn",
        };
        writeln!(s, "form {form}").unwrap();
        writeln!(s, "size {}", self.size).unwrap();
        writeln!(s, "gamma0 {} {}", self.gamma0.re, self.gamma0.im).unwrap();
        writeln!(s, "weight {}", self.weight).unwrap();
        writeln!(s, "provenance {}", self.provenance).unwrap();
        for i in 0..self.size {
            let row: Vec<String> = (0..self.size)
                .map(|j| {
                    let v = self.get(i, j);
                    format!("{} {}", v.re, v.im)
                })
                .collect();
            writeln!(s, "{}", row.join(" ")).unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let mut field = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| parse_err("boundary map", format!("missing `{key}`")))?;
            line.strip_prefix(key)
                .map(|r| r.trim().to_string())
                .ok_or_else(|| parse_err("boundary map", format!("expected `{key}`, got `{line}`")))
        };
        let form = match field("form")?.as_str() {
            "nd" => MapForm::Nd,
            "dn" => MapForm::Dn,
            other => return Err(parse_err("boundary map", format!("unknown form `{other}`"))),
        };
        let bad = |what: &str| parse_err("boundary map", format!("bad {what}"));
        let size: usize = field("size")?.parse().map_err(|_| bad("size"))?;
        let g: Vec<f64> = field("gamma0")?
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("gamma0"))?;
        if g.len() != 2 {
            return Err(bad("gamma0"));
        }
        let weight: f64 = field("weight")?.parse().map_err(|_| bad("weight"))?;
        let provenance = field("provenance")?;
        let mut matrix = Vec::with_capacity(size * size);
        for _ in 0..size {
            let row: Vec<f64> = lines
                .next()
                .ok_or_else(|| bad("row count"))?
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("entry"))?;
            if row.len() != 2 * size {
                return Err(bad("row length"));
            }
            matrix.extend(row.chunks(2).map(|c| Complex64::new(c[0], c[1])));
        }
        Ok(Self { form, size, matrix, gamma0: Complex64::new(g[0], g[1]), weight, provenance })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Electrode pitch `2π/L` in model units (boundary length 2π).
pub fn pitch_weight(electrodes: usize) -> f64 {
    2.0 * PI / electrodes as f64
}

/// `R(m,n) = γ₀·w·Σ_ℓ t^m_ℓ v^n_ℓ` with `t^j = T^j/‖T^j‖`, `v^j = V^j/‖T^j‖`.
pub fn build_nd(currents: &[CurrentFrame], voltages: &[VoltageFrame], weight: f64, gamma0: Complex64) -> Result<DnMap> {
    let n = currents.len();
    if n == 0 || voltages.len() != n {
        return invalid("need matching, nonempty current and voltage frames");
    }
    let l = currents[0].values.len();
    let norms: Vec<f64> = currents.iter().map(|c| c.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()).collect();
    if norms.contains(&0.0) {
        return Err(Error::Singular("zero current pattern".into()));
    }
    let t: Vec<Vec<Complex64>> =
        currents.iter().zip(&norms).map(|(c, s)| c.values.iter().map(|v| v / *s).collect()).collect();
    // rank check through the Gram matrix of the normalized patterns
    let gram = DMatrix::from_fn(n, n, |a, b| t[a].iter().zip(&t[b]).map(|(x, y)| x.conj() * y).sum::<Complex64>());
    let min_pivot = gram.clone().lu().u().diagonal().iter().map(|d| d.norm()).fold(f64::INFINITY, f64::min);
    if !(min_pivot > 1e-10) {
        return Err(Error::Singular("current patterns are linearly dependent".into()));
    }
    let mut matrix = Vec::with_capacity(n * n);
    for tm in &t {
        for (vf, s) in voltages.iter().zip(&norms) {
            if vf.values.len() != l {
                return invalid("voltage frame length differs from current frame length");
            }
            let sum: Complex64 = tm.iter().zip(&vf.values).map(|(a, v)| a * v / *s).sum();
            matrix.push(gamma0 * weight * sum);
        }
    }
    Ok(DnMap { form: MapForm::Nd, size: n, matrix, gamma0, weight, provenance: String::new() })
}

/// Inverts an ND map to the DN map (or back).
pub fn invert(map: &DnMap) -> Result<DnMap> {
    let lu = map.to_nalgebra().lu();
    let inv = lu.try_inverse().ok_or_else(|| Error::Singular("boundary map matrix is singular".into()))?;
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("boundary map matrix is singular".into()));
    }
    let form = match map.form {
        MapForm::Nd => MapForm::Dn,
        MapForm::Dn => MapForm::Nd,
    };
    Ok(map.with_matrix(form, &inv))
}

pub fn invert_to_dn(nd: &DnMap) -> Result<DnMap> {
    if nd.form != MapForm::Nd {
        return invalid("expected an ND map");
    }
    invert(nd)
}

/// DN map of the homogeneous admittivity `γ ≡ 1` on the same mesh and electrodes.
pub fn reference_dn(model: &CemModel, triangles: usize, amplitude: f64, exec: Execution) -> Result<DnMap> {
    let currents = trig_patterns(model.electrode_count(), amplitude)?;
    let ones = vec![Complex64::new(1.0, 0.0); triangles];
    let voltages = model.factorize(&ones)?.solve_frames(&currents, exec)?;
    let nd = build_nd(&currents, &voltages, pitch_weight(model.electrode_count()), Complex64::new(1.0, 0.0))?;
    invert_to_dn(&nd)
}

/// Least-squares constant `γ₀` with `Λ_γ ≈ γ₀·Λ₁` (Frobenius inner product).
pub fn fit_gamma0(dn: &DnMap, reference: &DnMap) -> Complex64 {
    let num: Complex64 = reference.matrix.iter().zip(&dn.matrix).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = reference.matrix.iter().map(|a| a.norm_sqr()).sum();
    num / den
}
