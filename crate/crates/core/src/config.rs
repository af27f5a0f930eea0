//! Pipeline configuration (TOML) and its provenance hash.

use crate::error::{invalid, parse_err, Result};
use crate::forward::{Pathology, PhantomSpec, TissueValues};
use crate::geometry::DomainKind;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Output subdirectory name.
    pub name: String,
    pub domain: DomainConfig,
    pub electrodes: ElectrodeConfig,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub phantom: PhantomConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub grids: GridConfig,
    pub reconstruction: ReconstructionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// `chest` or `disc`.
    pub kind: String,
    pub perimeter_mm: f64,
    #[serde(default = "default_vertices")]
    pub vertices: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrodeConfig {
    pub count: usize,
    pub length_mm: f64,
    #[serde(default = "default_height")]
    pub height_mm: f64,
    /// Contact impedance `[re, im]`.
    pub contact: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub h_mm: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { h_mm: 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PhantomConfig {
    /// `none`, `pneumothorax` or `effusion`; ignored when `homogeneous` is set.
    #[serde(default = "default_pathology")]
    pub pathology: String,
    /// Constant admittivity `[re, im]` instead of the chest phantom.
    #[serde(default)]
    pub homogeneous: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub amplitude: f64,
    pub eta: f64,
    pub seed: u64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self { amplitude: 1.0, eta: 0.0, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// z-grid is `2^m × 2^m`.
    pub m: u32,
    /// k-grid step; the grid size is the smallest power of two covering the radius.
    pub k_step: f64,
    pub padding: f64,
    pub boundary_nodes: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { m: 6, k_step: 0.3, padding: 0.05, boundary_nodes: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionConfig {
    pub r: f64,
    pub r2: f64,
    pub alpha: f64,
    #[serde(default)]
    pub threshold: Option<f64>,
    /// Fixed `γ₀ = [re, im]`; fitted to the data when absent.
    #[serde(default)]
    pub gamma0: Option<[f64; 2]>,
    #[serde(default = "default_mollify")]
    pub mollify_width: f64,
    /// `false` runs the standard method only.
    #[serde(default = "default_true")]
    pub prior: bool,
    /// Region file for the spatial prior, relative to the config file.
    #[serde(default)]
    pub prior_file: Option<PathBuf>,
}

fn default_vertices() -> usize {
    512
}
fn default_height() -> f64 {
    13.5
}
fn default_pathology() -> String {
    "none".into()
}
fn default_mollify() -> f64 {
    2.0
}
fn default_true() -> bool {
    true
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| parse_err("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a relative `prior_file` is resolved against its directory.
    pub fn read(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        if let Some(p) = &cfg.reconstruction.prior_file {
            if p.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.reconstruction.prior_file = Some(base.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.reconstruction;
        self.domain_kind()?;
        self.pathology()?;
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return invalid(format!("config name must be a plain directory name, got '{}'", self.name));
        }
        if !(r.r > 0.0) || r.r > r.r2 {
            return invalid(format!("need 0 < R ≤ R₂, got R = {}, R₂ = {}", r.r, r.r2));
        }
        if !(0.0..=1.0).contains(&r.alpha) {
            return invalid(format!("α must lie in [0, 1], got {}", r.alpha));
        }
        if let Some(t) = r.threshold {
            if !(t > 0.0) {
                return invalid(format!("threshold must be positive, got {t}"));
            }
        }
        if !(self.data.eta >= 0.0) {
            return invalid(format!("η must be nonnegative, got {}", self.data.eta));
        }
        if !(r.mollify_width > 0.0) {
            return invalid("mollify_width must be positive");
        }
        if !(self.grids.k_step > 0.0) {
            return invalid("k_step must be positive");
        }
        if self.grids.boundary_nodes < 2 * self.electrodes.count {
            return invalid(format!("boundary_nodes must be at least {}", 2 * self.electrodes.count));
        }
        if let Some(p) = &r.prior_file {
            if r.prior && !p.exists() {
                return invalid(format!("prior file {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    pub fn domain_kind(&self) -> Result<DomainKind> {
        match self.domain.kind.as_str() {
            "chest" => Ok(DomainKind::Chest),
            "disc" => Ok(DomainKind::Disc),
            other => invalid(format!("unknown domain kind '{other}'")),
        }
    }

    pub fn pathology(&self) -> Result<Pathology> {
        self.phantom.pathology.parse()
    }

    pub fn contact(&self) -> Complex64 {
        complex(self.electrodes.contact)
    }

    pub fn gamma0(&self) -> Option<Complex64> {
        self.reconstruction.gamma0.map(complex)
    }

    /// True admittivity of the configured phantom.
    pub fn phantom_spec(&self) -> Result<PhantomSpec> {
        if let Some(v) = self.phantom.homogeneous {
            return Ok(PhantomSpec::homogeneous(complex(v)));
        }
        if self.domain_kind()? != DomainKind::Chest {
            return invalid("organ phantoms need the chest domain; set phantom.homogeneous");
        }
        let p = self.pathology()?;
        Ok(PhantomSpec::chest(p, &TissueValues::for_pathology(p), self.domain.perimeter_mm))
    }

    /// Canonical TOML form; equal configs give equal text.
    pub fn canonical_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of [`canonical_text`](Self::canonical_text).
    pub fn hash(&self) -> String {
        sha256_hex(self.canonical_text().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}
