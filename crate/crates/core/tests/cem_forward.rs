mod common;

use common::setup::{chest_phantom, Problem};
use dbar_eit::forward::{trig_patterns, CemModel, CurrentFrame, Pathology};
use dbar_eit::{Error, Execution};
use num_complex::Complex64;
use proptest::prelude::*;

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn voltages_sum_to_zero_and_are_reciprocal() {
    let p = Problem::chest(10.0);
    let gamma = chest_phantom(Pathology::Pneumothorax).on_mesh(&p.mesh);
    let cur = trig_patterns(32, 1.0).unwrap();
    let v = p.voltages(&gamma);
    for f in &v {
        let scale = f.values.iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(f.values.iter().sum::<Complex64>().norm() <= 1e-10 * scale.max(1.0));
    }
    for (a, b) in [(0, 5), (3, 20), (15, 30)] {
        let ab = inner(&v[a].values, &cur[b].values);
        let ba = inner(&v[b].values, &cur[a].values);
        assert!((ab - ba).norm() <= 1e-8 * ab.norm().max(ba.norm()), "{a} {b}: {ab} vs {ba}");
    }
}

#[test]
fn zero_current_is_singular() {
    let p = Problem::chest(12.0);
    let zero = CurrentFrame { index: 1, values: vec![Complex64::new(0.0, 0.0); 32] };
    let solver = p.model.factorize(&p.ones()).unwrap();
    assert!(matches!(solver.solve(&zero), Err(Error::Singular(_))));
}

#[test]
fn uniform_scaling_scales_voltages_inversely() {
    let p = Problem::chest(12.0);
    let gamma = chest_phantom(Pathology::Pneumothorax).on_mesh(&p.mesh);
    let scaled: Vec<Complex64> = gamma.iter().map(|g| g * 2.5).collect();
    let contact: Vec<Complex64> = p.layout.contact.iter().map(|z| z / 2.5).collect();
    let model = CemModel::new(&p.mesh, &contact, p.domain.model_scale()).unwrap();
    let cur = trig_patterns(32, 1.0).unwrap();
    let v1 = p.voltages(&gamma);
    let v2 = model.factorize(&scaled).unwrap().solve_frames(&cur, Execution::Sequential).unwrap();
    for (a, b) in v1.iter().zip(&v2) {
        let want: Vec<Complex64> = a.values.iter().map(|x| x / 2.5).collect();
        let err = common::setup::rel_l2(&b.values, &want);
        assert!(err < 1e-9, "frame {} err {err}", a.index);
    }
}

#[test]
fn frames_are_independent_of_execution() {
    let p = Problem::chest(12.0);
    let gamma = chest_phantom(Pathology::Effusion).on_mesh(&p.mesh);
    let cur = trig_patterns(32, 1.0).unwrap();
    let solver = p.model.factorize(&gamma).unwrap();
    let seq = solver.solve_frames(&cur, Execution::Sequential).unwrap();
    let par = solver.solve_frames(&cur, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    let one = solver.solve(&cur[7]).unwrap();
    assert_eq!(one, seq[7]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]
    #[test]
    fn reciprocity_for_random_admittivity(vals in proptest::collection::vec((0.2f64..2.0, 0.0f64..1.0), 5), a in 0usize..31, b in 0usize..31) {
        let p = Problem::chest(16.0);
        let mut ph = chest_phantom(Pathology::Pneumothorax);
        ph.background = Complex64::new(vals[0].0, vals[0].1);
        for ((_, v), x) in ph.regions.iter_mut().zip(&vals[1..]) {
            *v = Complex64::new(x.0, x.1);
        }
        let cur = trig_patterns(32, 1.0).unwrap();
        let v = p.voltages(&ph.on_mesh(&p.mesh));
        let ab = inner(&v[a].values, &cur[b].values);
        let ba = inner(&v[b].values, &cur[a].values);
        prop_assert!((ab - ba).norm() <= 1e-8 * ab.norm().max(ba.norm()).max(1e-12));
    }
}
