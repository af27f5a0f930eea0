//! Small chest and disc problems shared by the integration tests.

use dbar_eit::dnmap::{build_nd, invert_to_dn, pitch_weight, reference_dn, DnMap};
use dbar_eit::forward::{trig_patterns, CemModel, Pathology, PhantomSpec, TissueValues, VoltageFrame};
use dbar_eit::geometry::{build_domain, mesh_domain, place_electrodes, Domain, DomainKind, ElectrodeLayout, TriMesh};
use dbar_eit::Execution;
use num_complex::Complex64;

pub const PERIMETER: f64 = 1016.0;

pub struct Problem {
    pub domain: Domain,
    pub layout: ElectrodeLayout,
    pub mesh: TriMesh,
    pub model: CemModel,
}

impl Problem {
    pub fn chest(h: f64) -> Self {
        let domain = build_domain(DomainKind::Chest, PERIMETER, 512).unwrap();
        Self::on(domain, 32, 22.0, Complex64::new(2.4e-3, 0.0), h)
    }

    pub fn disc(electrodes: usize, length: f64, contact: f64, h: f64) -> Self {
        let domain = build_domain(DomainKind::Disc, 2.0 * std::f64::consts::PI, 512).unwrap();
        Self::on(domain, electrodes, length, Complex64::new(contact, 0.0), h)
    }

    fn on(domain: Domain, l: usize, length: f64, contact: Complex64, h: f64) -> Self {
        let layout = place_electrodes(&domain, l, length, 13.5, contact).unwrap();
        let mesh = mesh_domain(&domain, &layout, h).unwrap();
        let model = CemModel::new(&mesh, &layout.contact, domain.model_scale()).unwrap();
        Self { domain, layout, mesh, model }
    }

    pub fn electrodes(&self) -> usize {
        self.layout.count()
    }

    pub fn voltages(&self, gamma: &[Complex64]) -> Vec<VoltageFrame> {
        let cur = trig_patterns(self.electrodes(), 1.0).unwrap();
        self.model.factorize(gamma).unwrap().solve_frames(&cur, Execution::Sequential).unwrap()
    }

    /// DN map of `gamma` scaled by `1/γ₀`.
    pub fn dn(&self, gamma: &[Complex64], gamma0: Complex64) -> DnMap {
        let cur = trig_patterns(self.electrodes(), 1.0).unwrap();
        let v = self.voltages(gamma);
        invert_to_dn(&build_nd(&cur, &v, pitch_weight(self.electrodes()), gamma0).unwrap()).unwrap()
    }

    pub fn reference(&self) -> DnMap {
        reference_dn(&self.model, self.mesh.triangles.len(), 1.0, Execution::Sequential).unwrap()
    }

    pub fn delta(&self, gamma: &[Complex64], gamma0: Complex64) -> DnMap {
        self.dn(gamma, gamma0).difference(&self.reference()).unwrap()
    }

    pub fn ones(&self) -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0); self.mesh.triangles.len()]
    }
}

pub fn chest_phantom(p: Pathology) -> PhantomSpec {
    PhantomSpec::chest(p, &TissueValues::for_pathology(p), PERIMETER)
}

/// Chest phantom with every region and the background made real.
pub fn real_chest_phantom(p: Pathology) -> PhantomSpec {
    let mut ph = chest_phantom(p);
    ph.background = Complex64::new(ph.background.re, 0.0);
    for (_, v) in ph.regions.iter_mut() {
        *v = Complex64::new(v.re, 0.0);
    }
    ph
}

pub fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}
