use dbar_eit::config::PipelineConfig;
use dbar_eit::field::GridField;
use dbar_eit::pipeline::*;
use dbar_eit::Execution;
use std::path::Path;

const SMALL: &str = r#"
name = "small"

[domain]
kind = "chest"
perimeter_mm = 1016.0

[electrodes]
count = 32
length_mm = 22.0
contact = [2.4e-3, 0.0]

[mesh]
h_mm = 20.0

[phantom]
pathology = "pneumothorax"

[data]
eta = 0.001
seed = 7

[grids]
m = 5
k_step = 0.5

[reconstruction]
r = 3.0
r2 = 4.0
alpha = 0.5
"#;

fn null_config() -> PipelineConfig {
    PipelineConfig::read(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/null.toml")).unwrap()
}

fn small() -> PipelineConfig {
    PipelineConfig::parse(SMALL).unwrap()
}

fn read(p: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn null_config_reconstructs_unity() {
    let mut cfg = null_config();
    cfg.mesh.h_mm = 20.0;
    cfg.grids.m = 5;
    let root = tempfile::tempdir().unwrap();
    let ws = Workspace::new(cfg, Some(root.path()), Execution::default()).unwrap();
    let rec = ws.run().unwrap();
    assert!(rec.prior.is_none());
    let g = &rec.gamma_new.gamma;
    let omega = &ws.setup.grid.omega_mask;
    for i in (0..g.values.len()).filter(|&i| omega[i]) {
        assert!(g.valid[i] && (g.values[i] - 1.0).norm() < 1e-12, "{}", g.values[i]);
    }
    let m = rec.metrics.unwrap();
    assert!(m.rel_l2_re < 1e-12);
}

#[test]
fn runs_are_deterministic_and_carry_provenance() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let wa = Workspace::new(small(), Some(a.path()), Execution::Sequential).unwrap();
    let wb = Workspace::new(small(), Some(b.path()), Execution::Parallel).unwrap();
    let rec = wa.run().unwrap();
    wb.run().unwrap();
    assert!(rec.prior.is_some());
    for f in [DATA_FILE, DN_FILE, SCATTER_FILE] {
        assert_eq!(read(wa.path(f)), read(wb.path(f)), "{f}");
    }
    for f in [
        GAMMA_DB_FILE,
        PRIOR_FILE,
        GAMMA_PRIOR_FILE,
        SCATTER_PRIOR_FILE,
        SCATTER_SPLICED_FILE,
        GAMMA_NEW_FILE,
        METRICS_FILE,
    ] {
        let (x, y) = (read(wa.run_dir().join(f)), read(wb.run_dir().join(f)));
        assert_eq!(x, y, "{f}");
        let text = String::from_utf8(x).unwrap();
        assert!(text.lines().take(5).any(|l| l.contains(&format!("config={}", wa.cfg.hash()))), "{f}");
    }
    let field = GridField::read(&wa.run_dir().join(GAMMA_NEW_FILE)).unwrap();
    assert_eq!(field.values, rec.gamma_new.gamma.values);
}

#[test]
fn unit_weight_without_extension_is_the_standard_method() {
    let root = tempfile::tempdir().unwrap();
    let mut cfg = small();
    cfg.reconstruction.alpha = 1.0;
    cfg.reconstruction.r2 = cfg.reconstruction.r;
    let ws = Workspace::new(cfg.clone(), Some(root.path()), Execution::default()).unwrap();
    let with = ws.run().unwrap();
    cfg.reconstruction.prior = false;
    let ws2 = Workspace::new(cfg, Some(root.path()), Execution::default()).unwrap();
    let without = ws2.reconstruct().unwrap();
    assert_eq!(with.gamma_new.gamma.values, without.gamma_new.gamma.values);
    assert_eq!(with.gamma_db.gamma.values, with.gamma_new.gamma.values);
}

#[test]
fn stages_need_their_inputs() {
    let root = tempfile::tempdir().unwrap();
    let ws = Workspace::new(small(), Some(root.path()), Execution::default()).unwrap();
    let err = ws.dnmap().unwrap_err().to_string();
    assert!(err.contains("simulate"), "{err}");
    assert!(ws.scatter().is_err());
}

#[test]
fn render_outputs() {
    let root = tempfile::tempdir().unwrap();
    let ws = Workspace::new(small(), Some(root.path()), Execution::default()).unwrap();
    ws.run().unwrap();
    let first = ws.render(true, true).unwrap();
    assert_eq!(first.len(), 8);
    let bytes: Vec<Vec<u8>> = first.iter().map(read).collect();
    let again = ws.render(true, true).unwrap();
    assert_eq!(bytes, again.iter().map(read).collect::<Vec<_>>());
    let mut limits = Vec::new();
    for p in first.iter().filter(|p| p.to_string_lossy().ends_with("_conductivity.png")) {
        let dec = png::Decoder::new(std::io::BufReader::new(std::fs::File::open(p).unwrap()));
        let reader = dec.read_info().unwrap();
        let text = &reader.info().uncompressed_latin1_text;
        let get = |k: &str| text.iter().find(|c| c.keyword == k).unwrap().text.clone();
        assert_eq!(get("config-hash"), ws.cfg.hash());
        limits.push((get("vmin"), get("vmax")));
    }
    assert_eq!(limits.len(), 4);
    assert!(limits.windows(2).all(|w| w[0] == w[1]));
}
