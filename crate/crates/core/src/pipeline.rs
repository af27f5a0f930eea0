//! End-to-end stages: simulate → DN maps → measured scattering → standard
//! D-bar → prior → spliced scattering → prior-weighted D-bar → admittivity.
//! Every stage result can be written to and read back from an output
//! directory; files carry the config hash and the hashes of their inputs.

use crate::config::{sha256_hex, PipelineConfig};
use crate::dbar::{compute_mint, solve_dbar, MintField};
use crate::dnmap::{build_nd, fit_gamma0, invert_to_dn, pitch_weight, reference_dn, DnMap};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::field::GridField;
use crate::forward::{
    add_noise, chest_prior_regions, parse_regions, read_simulated, trig_patterns, write_simulated, CemModel,
    PhantomSpec, Region, SimulatedData,
};
use crate::geometry::{build_domain, build_zgrid, mesh_domain, mesh_to_text, place_electrodes, read_mesh, write_mesh};
use crate::geometry::{BoundaryCurve, Domain, ElectrodeLayout, TriMesh, ZGrid};
use crate::prior::{build_prior, mollify, prior_scattering, q_from_gamma, LsSolver};
use crate::recovery::{compute_metrics, gamma_from_q, q_from_m, Metrics, Route};
use crate::render::{common_limits, render, Part};
use crate::scattering::{
    measured_scattering, splice_scattering, threshold_scattering, BieSolver, KGrid, ScatteringData,
};
use num_complex::Complex64;
use std::path::{Path, PathBuf};

/// Environment variable naming the root of all output directories.
pub const OUTPUT_ENV: &str = "DBAR_EIT_OUT";

pub const MESH_FILE: &str = "mesh.txt";
pub const DATA_FILE: &str = "data.txt";
pub const TRUTH_FILE: &str = "truth.txt";
pub const DN_FILE: &str = "dn.txt";
pub const DN_REFERENCE_FILE: &str = "dn_reference.txt";
pub const SCATTER_FILE: &str = "scatter_measured.txt";
pub const GAMMA_DB_FILE: &str = "gamma_db.txt";
pub const PRIOR_FILE: &str = "prior.txt";
pub const GAMMA_PRIOR_FILE: &str = "gamma_prior.txt";
pub const SCATTER_PRIOR_FILE: &str = "scatter_prior.txt";
pub const SCATTER_SPLICED_FILE: &str = "scatter_spliced.txt";
pub const GAMMA_NEW_FILE: &str = "gamma_new.txt";
pub const GAMMA_NEW_Q21_FILE: &str = "gamma_new_q21.txt";
pub const METRICS_FILE: &str = "metrics.txt";

/// Output directory of a config: `$DBAR_EIT_OUT/<name>`, or `out/<name>`.
pub fn output_dir(cfg: &PipelineConfig, root: Option<&Path>) -> PathBuf {
    let root = root
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    root.join(&cfg.name)
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{name}: {io}"))),
        Error::Parse { context, message } => Error::Parse { context: format!("{name}: {context}"), message },
        Error::Invalid(m) => Error::Invalid(format!("{name}: {m}")),
        Error::Geometry(m) => Error::Geometry(format!("{name}: {m}")),
        Error::Singular(m) => Error::Singular(format!("{name}: {m}")),
        Error::NoConvergence(m) => Error::NoConvergence(format!("{name}: {m}")),
    })
}

/// `config <hash> <file>=<sha256> ...`.
fn provenance(cfg: &PipelineConfig, inputs: &[(&str, &str)]) -> String {
    let mut s = format!("config={}", cfg.hash());
    for (name, text) in inputs {
        s.push_str(&format!(" {name}={}", sha256_hex(text.as_bytes())));
    }
    s
}

/// Geometry shared by all stages.
pub struct Setup {
    pub domain: Domain,
    pub layout: ElectrodeLayout,
    pub grid: ZGrid,
    pub phantom: PhantomSpec,
}

impl Setup {
    pub fn new(cfg: &PipelineConfig) -> Result<Self> {
        let domain = build_domain(cfg.domain_kind()?, cfg.domain.perimeter_mm, cfg.domain.vertices)?;
        let e = &cfg.electrodes;
        let layout = place_electrodes(&domain, e.count, e.length_mm, e.height_mm, cfg.contact())?;
        let grid = build_zgrid(&domain, cfg.grids.m, cfg.grids.padding)?;
        Ok(Self { domain, layout, grid, phantom: cfg.phantom_spec()? })
    }

    pub fn model(&self, mesh: &TriMesh) -> Result<CemModel> {
        CemModel::new(mesh, &self.layout.contact, self.domain.model_scale())
    }

    /// True admittivity on the z-grid (background outside Ω), valid on Ω.
    pub fn truth_field(&self) -> GridField {
        let values = self.phantom.on_grid(&self.grid, self.phantom.background);
        GridField::new("truth", &self.grid, values, self.grid.omega_mask.clone())
    }

    pub fn truth_regions(&self) -> Vec<Region> {
        self.phantom.regions.iter().map(|(r, _)| r.clone()).collect()
    }
}

pub struct Simulation {
    pub mesh: TriMesh,
    pub data: SimulatedData,
    pub truth: GridField,
}

/// Meshes the domain and simulates noisy electrode voltages.
pub fn simulate(cfg: &PipelineConfig, setup: &Setup, exec: Execution) -> Result<Simulation> {
    let mesh = mesh_domain(&setup.domain, &setup.layout, cfg.mesh.h_mm)?;
    let model = setup.model(&mesh)?;
    let currents = trig_patterns(cfg.electrodes.count, cfg.data.amplitude)?;
    let clean = model.factorize(&setup.phantom.on_mesh(&mesh))?.solve_frames(&currents, exec)?;
    let voltages = add_noise(&clean, cfg.data.eta, cfg.data.seed)?;
    let data = SimulatedData {
        amplitude: cfg.data.amplitude,
        eta: cfg.data.eta,
        seed: cfg.data.seed,
        provenance: provenance(cfg, &[("phantom", &setup.phantom.canonical_text())]),
        currents,
        voltages,
    };
    let mut truth = setup.truth_field();
    truth.provenance = data.provenance.clone();
    Ok(Simulation { mesh, data, truth })
}

/// `Λ_γ/γ₀` and `Λ₁` on the same mesh and electrodes.
#[derive(Debug, Clone)]
pub struct BoundaryMaps {
    pub dn: DnMap,
    pub reference: DnMap,
}

impl BoundaryMaps {
    pub fn gamma0(&self) -> Complex64 {
        self.dn.gamma0
    }
}

pub fn dn_maps(
    cfg: &PipelineConfig,
    setup: &Setup,
    mesh: &TriMesh,
    data: &SimulatedData,
    exec: Execution,
) -> Result<BoundaryMaps> {
    let l = data.electrode_count();
    if l != setup.layout.count() {
        return invalid(format!("data has {l} electrodes, config {}", setup.layout.count()));
    }
    let model = setup.model(mesh)?;
    let mut reference = reference_dn(&model, mesh.triangles.len(), data.amplitude, exec)?;
    let weight = pitch_weight(l);
    let gamma0 = match cfg.gamma0() {
        Some(g) => g,
        None => {
            let raw = invert_to_dn(&build_nd(&data.currents, &data.voltages, weight, Complex64::new(1.0, 0.0))?)?;
            fit_gamma0(&raw, &reference)
        }
    };
    let mut dn = invert_to_dn(&build_nd(&data.currents, &data.voltages, weight, gamma0)?)?;
    dn.provenance = provenance(cfg, &[("data", &data.to_text())]);
    reference.provenance = provenance(cfg, &[(MESH_FILE, &mesh_to_text(mesh))]);
    Ok(BoundaryMaps { dn, reference })
}

/// Boundary-route scattering on `|k| ≤ R` (thresholded when configured) on
/// the k-grid of step `k_step` covering `R`.
pub fn measured(cfg: &PipelineConfig, setup: &Setup, maps: &BoundaryMaps, exec: Execution) -> Result<ScatteringData> {
    let r = cfg.reconstruction.r;
    let delta = maps.dn.difference(&maps.reference)?;
    let curve = BoundaryCurve::new(&setup.domain.smooth_curve(), cfg.grids.boundary_nodes);
    let solver = BieSolver::new(curve, &delta, true)?;
    let grid = KGrid::with_step(cfg.grids.k_step, r);
    let (mut s, dropped) = measured_scattering(&solver, &grid, r, exec);
    if !dropped.is_empty() {
        log::warn!("{} k points dropped from the measured scattering", dropped.len());
    }
    if let Some(t) = cfg.reconstruction.threshold {
        s = threshold_scattering(&s, t)?;
    }
    s.provenance = provenance(cfg, &[(DN_FILE, &maps.dn.to_text()), (DN_REFERENCE_FILE, &maps.reference.to_text())]);
    Ok(s)
}

/// γ on the z-grid with validity flags, and its Q₂₁-route cross-check.
#[derive(Debug, Clone)]
pub struct Recovered {
    pub gamma: GridField,
    pub gamma_q21: GridField,
}

/// Steps II–III for given scattering data and constants; multiplies by `γ₀`.
pub fn recover(
    s: &ScatteringData,
    mint: &MintField,
    grid: &ZGrid,
    gamma0: Complex64,
    label: &str,
    exec: Execution,
) -> Result<Recovered> {
    let m0 = stage("dbar", solve_dbar(s, mint, grid, exec))?;
    let (q, qvalid) = stage("recovery", q_from_m(&m0.m, grid))?;
    let make = |route: Route, name: &str| -> Result<GridField> {
        let g = gamma_from_q(&q, grid, route)?;
        let values: Vec<Complex64> = g.iter().map(|v| v * gamma0).collect();
        let valid =
            (0..grid.len()).map(|i| grid.omega_mask[i] && m0.valid[i] && qvalid[i] && values[i].is_finite()).collect();
        Ok(GridField::new(name, grid, values, valid))
    };
    Ok(Recovered { gamma: make(Route::Q12, label)?, gamma_q21: make(Route::Q21, &format!("{label}-q21"))? })
}

/// The standard D-bar reconstruction from measured scattering.
pub fn standard(s: &ScatteringData, grid: &ZGrid, gamma0: Complex64, exec: Execution) -> Result<Recovered> {
    recover(s, &MintField::identity(grid.len(), s.radius2), grid, gamma0, "gamma", exec)
}

/// Step 0–I products of the a-priori method.
#[derive(Debug, Clone)]
pub struct PriorProducts {
    pub prior: PhantomSpec,
    /// Mollified prior (absolute admittivity) on the z-grid.
    pub field: GridField,
    pub scattering: ScatteringData,
    pub spliced: ScatteringData,
    pub mint: MintField,
}

/// Builds the prior from an initial reconstruction, its scattering on
/// `|k| ≤ R₂` and the spliced data `S_{R,R₂}`.
#[allow(clippy::too_many_arguments)]
pub fn prior_products(
    cfg: &PipelineConfig,
    grid: &ZGrid,
    initial: &GridField,
    regions: &[Region],
    measured: &ScatteringData,
    gamma0: Complex64,
    exec: Execution,
) -> Result<PriorProducts> {
    let rc = &cfg.reconstruction;
    let prior = stage("prior", build_prior(&initial.values, grid, regions))?;
    let raw: Vec<Complex64> = prior.on_grid(grid, prior.background).iter().map(|v| v / gamma0).collect();
    let smooth = mollify(&raw, grid.n, rc.mollify_width)?;
    let q = stage("prior", q_from_gamma(&smooth, grid))?;
    let solver = LsSolver::new(q, grid)?;
    let kgrid = KGrid::with_step(cfg.grids.k_step, rc.r2);
    let ps = stage("prior scattering", prior_scattering(&solver, &kgrid, rc.r2, exec))?;
    let mut scattering = ps.scattering;
    scattering.provenance = provenance(cfg, &[(GAMMA_DB_FILE, &initial.to_text())]);
    let embedded = embed(measured, kgrid.n)?;
    let mut spliced = splice_scattering(&embedded, &scattering, rc.r2)?;
    spliced.provenance =
        provenance(cfg, &[(SCATTER_FILE, &measured.to_text()), (SCATTER_PRIOR_FILE, &scattering.to_text())]);
    let mint = compute_mint(&ps.mean, rc.alpha, rc.r2)?;
    let field_values: Vec<Complex64> = smooth.iter().map(|v| v * gamma0).collect();
    let mut field = GridField::new("prior", grid, field_values, grid.omega_mask.clone());
    field.provenance = scattering.provenance.clone();
    Ok(PriorProducts { prior, field, scattering, spliced, mint })
}

/// Measured data placed on the larger centred grid with the same step.
pub fn embed(s: &ScatteringData, n: usize) -> Result<ScatteringData> {
    let small = s.grid.n;
    if n < small || (n - small) % 2 == 1 {
        return invalid(format!("cannot embed a {small}-point grid in {n} points"));
    }
    let off = (n - small) / 2;
    let mut out = ScatteringData::zeros(KGrid { n, h: s.grid.h }, s.source, s.radius);
    out.radius2 = s.radius2;
    out.provenance = s.provenance.clone();
    for i in 0..s.grid.len() {
        let j = (i / small + off) * n + i % small + off;
        out.s12[j] = s.s12[i];
        out.s21[j] = s.s21[i];
        out.active[j] = s.active[i];
    }
    Ok(out)
}

/// Region outlines for the prior: the configured file or the built-in chest set.
pub fn prior_regions(cfg: &PipelineConfig) -> Result<Vec<Region>> {
    match &cfg.reconstruction.prior_file {
        Some(p) => parse_regions(&std::fs::read_to_string(p)?),
        None if cfg.domain_kind()? == crate::geometry::DomainKind::Chest => {
            Ok(chest_prior_regions(cfg.domain.perimeter_mm))
        }
        None => invalid("a prior on a non-chest domain needs reconstruction.prior_file"),
    }
}

/// `R<r>_R2-<r2>_a<alpha>`, with `_t<threshold>` and `_noprior` when set.
pub fn run_tag(cfg: &PipelineConfig) -> String {
    let rc = &cfg.reconstruction;
    let mut tag = format!("R{}_R2-{}_a{}", rc.r, rc.r2, rc.alpha);
    if let Some(t) = rc.threshold {
        tag.push_str(&format!("_t{t}"));
    }
    if !rc.prior {
        tag.push_str("_noprior");
    }
    tag
}

/// Whether the configuration reduces to the standard method.
pub fn is_standard(cfg: &PipelineConfig) -> bool {
    let r = &cfg.reconstruction;
    !r.prior || (r.alpha == 1.0 && r.r2 == r.r)
}

/// Everything `reconstruct` produces.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub gamma_db: Recovered,
    pub prior: Option<PriorProducts>,
    pub gamma_new: Recovered,
    pub metrics: Option<Metrics>,
}

/// Steps 0–III from measured scattering. With `is_standard(cfg)` the prior
/// is skipped and `γ_new = γ_DB`.
pub fn reconstruct(
    cfg: &PipelineConfig,
    setup: &Setup,
    measured: &ScatteringData,
    gamma0: Complex64,
    truth: Option<&GridField>,
    exec: Execution,
) -> Result<Reconstruction> {
    let grid = &setup.grid;
    let mut gamma_db = stage("standard reconstruction", standard(measured, grid, gamma0, exec))?;
    let db_prov = provenance(cfg, &[(SCATTER_FILE, &measured.to_text())]);
    gamma_db.gamma.provenance = db_prov.clone();
    gamma_db.gamma_q21.provenance = db_prov;
    let (prior, gamma_new) = if is_standard(cfg) {
        (None, gamma_db.clone())
    } else {
        let regions = prior_regions(cfg)?;
        let p = prior_products(cfg, grid, &gamma_db.gamma, &regions, measured, gamma0, exec)?;
        let mut g = stage("a-priori reconstruction", recover(&p.spliced, &p.mint, grid, gamma0, "gamma", exec))?;
        let prov =
            provenance(cfg, &[(SCATTER_SPLICED_FILE, &p.spliced.to_text()), (GAMMA_PRIOR_FILE, &p.field.to_text())]);
        g.gamma.provenance = prov.clone();
        g.gamma_q21.provenance = prov;
        (Some(p), g)
    };
    let metrics = match truth {
        Some(t) if t.matches(grid) => {
            Some(compute_metrics(&gamma_new.gamma.values, &t.values, grid, &setup.truth_regions())?)
        }
        Some(_) => return invalid("truth field does not match the z-grid"),
        None => None,
    };
    Ok(Reconstruction { gamma_db, prior, gamma_new, metrics })
}

/// File-backed stages used by the command line.
pub struct Workspace {
    pub cfg: PipelineConfig,
    pub dir: PathBuf,
    pub setup: Setup,
    pub exec: Execution,
}

impl Workspace {
    pub fn new(cfg: PipelineConfig, root: Option<&Path>, exec: Execution) -> Result<Self> {
        let dir = output_dir(&cfg, root);
        std::fs::create_dir_all(&dir)?;
        let setup = Setup::new(&cfg)?;
        Ok(Self { cfg, dir, setup, exec })
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    /// Directory of the reconstruction artifacts for the current parameters.
    pub fn run_dir(&self) -> PathBuf {
        self.dir.join(run_tag(&self.cfg))
    }

    fn need(&self, file: &str, producer: &str) -> Result<PathBuf> {
        let p = self.path(file);
        if p.exists() {
            Ok(p)
        } else {
            invalid(format!("{} is missing; run `{producer}` first", p.display()))
        }
    }

    pub fn simulate(&self) -> Result<Simulation> {
        let sim = stage("simulate", simulate(&self.cfg, &self.setup, self.exec))?;
        write_mesh(&sim.mesh, &self.path(MESH_FILE))?;
        write_simulated(&sim.data, &self.path(DATA_FILE))?;
        sim.truth.write(&self.path(TRUTH_FILE))?;
        Ok(sim)
    }

    pub fn dnmap(&self) -> Result<BoundaryMaps> {
        let mesh = read_mesh(&self.need(MESH_FILE, "simulate")?)?;
        let data = read_simulated(&self.need(DATA_FILE, "simulate")?)?;
        let maps = stage("dnmap", dn_maps(&self.cfg, &self.setup, &mesh, &data, self.exec))?;
        maps.dn.write(&self.path(DN_FILE))?;
        maps.reference.write(&self.path(DN_REFERENCE_FILE))?;
        Ok(maps)
    }

    pub fn scatter(&self) -> Result<ScatteringData> {
        let dn = DnMap::read(&self.need(DN_FILE, "dnmap")?)?;
        let reference = DnMap::read(&self.need(DN_REFERENCE_FILE, "dnmap")?)?;
        let maps = BoundaryMaps { dn, reference };
        let s = stage("scatter", measured(&self.cfg, &self.setup, &maps, self.exec))?;
        s.write(&self.path(SCATTER_FILE))?;
        Ok(s)
    }

    /// Reuses the measured scattering file when it was made with the same
    /// `R`, threshold and k-step; recomputes it otherwise.
    pub fn reconstruct(&self) -> Result<Reconstruction> {
        let dn = DnMap::read(&self.need(DN_FILE, "dnmap")?)?;
        let gamma0 = dn.gamma0;
        let s = match ScatteringData::read(&self.path(SCATTER_FILE)) {
            Ok(s) if self.scatter_is_current(&s, &dn) => s,
            _ => self.scatter()?,
        };
        let truth = GridField::read(&self.path(TRUTH_FILE)).ok();
        let rec = reconstruct(&self.cfg, &self.setup, &s, gamma0, truth.as_ref(), self.exec)?;
        let run = self.run_dir();
        std::fs::create_dir_all(&run)?;
        let out = |f: &str| run.join(f);
        rec.gamma_db.gamma.write(&out(GAMMA_DB_FILE))?;
        if let Some(p) = &rec.prior {
            let text = format!("# prior {}\n{}", p.scattering.provenance, p.prior.canonical_text());
            std::fs::write(out(PRIOR_FILE), text)?;
            p.field.write(&out(GAMMA_PRIOR_FILE))?;
            p.scattering.write(&out(SCATTER_PRIOR_FILE))?;
            p.spliced.write(&out(SCATTER_SPLICED_FILE))?;
        }
        rec.gamma_new.gamma.write(&out(GAMMA_NEW_FILE))?;
        rec.gamma_new.gamma_q21.write(&out(GAMMA_NEW_Q21_FILE))?;
        if let Some(m) = &rec.metrics {
            let text = format!("# {}\n{}", rec.gamma_new.gamma.provenance, m.to_text());
            std::fs::write(out(METRICS_FILE), text)?;
        }
        Ok(rec)
    }

    /// Heatmaps of the truth and every reconstruction present in the run
    /// directory, one per part. Returns the written paths.
    pub fn render(&self, common_scale: bool, overlay_truth: bool) -> Result<Vec<PathBuf>> {
        let run = self.run_dir();
        let mut fields = Vec::new();
        if self.path(TRUTH_FILE).exists() {
            fields.push(("truth".to_string(), GridField::read(&self.path(TRUTH_FILE))?));
        }
        for file in [GAMMA_DB_FILE, GAMMA_PRIOR_FILE, GAMMA_NEW_FILE] {
            let p = run.join(file);
            if p.exists() {
                fields.push((file.trim_end_matches(".txt").to_string(), GridField::read(&p)?));
            }
        }
        if fields.is_empty() {
            return invalid(format!("nothing to render in {}", run.display()));
        }
        let grid = &self.setup.grid;
        let outlines: Vec<Vec<Complex64>> = if overlay_truth {
            self.setup.truth_regions().into_iter().map(|r| r.polygon).collect()
        } else {
            Vec::new()
        };
        std::fs::create_dir_all(&run)?;
        let hash = self.cfg.hash();
        let mut written = Vec::new();
        for part in [Part::Conductivity, Part::Permittivity] {
            let shared = if common_scale {
                Some(common_limits(&fields.iter().map(|(_, f)| f).collect::<Vec<_>>(), grid, part)?)
            } else {
                None
            };
            for (stem, f) in &fields {
                let img = render(f, grid, part, shared, &outlines)?;
                let path = run.join(format!("{stem}_{}.png", part.name()));
                img.write_png(&path, &hash, part)?;
                written.push(path);
            }
        }
        Ok(written)
    }

    fn scatter_is_current(&self, s: &ScatteringData, dn: &DnMap) -> bool {
        let rc = &self.cfg.reconstruction;
        let reference = match DnMap::read(&self.path(DN_REFERENCE_FILE)) {
            Ok(r) => r,
            Err(_) => return false,
        };
        s.radius == rc.r
            && s.grid == KGrid::with_step(self.cfg.grids.k_step, rc.r)
            && s.provenance
                == provenance(&self.cfg, &[(DN_FILE, &dn.to_text()), (DN_REFERENCE_FILE, &reference.to_text())])
    }

    /// All stages in order.
    pub fn run(&self) -> Result<Reconstruction> {
        self.simulate()?;
        self.dnmap()?;
        self.scatter()?;
        self.reconstruct()
    }
}
