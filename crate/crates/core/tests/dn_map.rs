mod common;

use common::setup::{chest_phantom, real_chest_phantom, Problem};
use dbar_eit::dnmap::{fit_gamma0, DnMap};
use dbar_eit::forward::Pathology;
use num_complex::Complex64;

#[test]
fn homogeneous_unit_gives_zero_difference() {
    let p = Problem::chest(12.0);
    let d = p.delta(&p.ones(), Complex64::new(1.0, 0.0));
    assert!(d.matrix.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
}

#[test]
fn chest_difference_is_nonzero_and_symmetric() {
    let p = Problem::chest(10.0);
    let gamma = chest_phantom(Pathology::Pneumothorax).on_mesh(&p.mesh);
    let d = p.delta(&gamma, Complex64::new(0.8, 0.4));
    let full = p.dn(&gamma, Complex64::new(0.8, 0.4));
    assert!(d.frobenius() > 1e-3 * full.frobenius(), "{}", d.frobenius());
    assert!(full.asymmetry() < 1e-6, "{}", full.asymmetry());
    assert!(d.asymmetry() < 1e-6, "{}", d.asymmetry());
}

#[test]
fn real_admittivity_gives_real_map() {
    let p = Problem::chest(10.0);
    let gamma = real_chest_phantom(Pathology::Effusion).on_mesh(&p.mesh);
    let dn = p.dn(&gamma, Complex64::new(1.0, 0.0));
    let im = dn.matrix.iter().map(|v| v.im * v.im).sum::<f64>().sqrt();
    assert!(im < 1e-8 * dn.frobenius(), "{im}");
}

#[test]
fn fitted_gamma0_of_a_constant() {
    let p = Problem::disc(16, 0.2, 1e-6, 0.06);
    let c = Complex64::new(0.8, 0.4);
    let gamma = vec![c; p.mesh.triangles.len()];
    let fit = fit_gamma0(&p.dn(&gamma, Complex64::new(1.0, 0.0)), &p.reference());
    assert!((fit - c).norm() < 1e-4 * c.norm(), "{fit}");
}

#[test]
fn unit_disc_eigenvalues() {
    let p = Problem::disc(16, 0.2, 1e-6, 0.04);
    let dn = p.reference();
    // cos/sin pair of mode n sits at indices n-1 and L/2-1+n
    for n in 1..4 {
        for i in [n - 1, 7 + n] {
            let v = dn.get(i, i);
            assert!((v.re - n as f64).abs() < 0.05 * n as f64 && v.im.abs() < 1e-9, "mode {n}: {v}");
        }
    }
}

#[test]
fn assembly_is_deterministic_and_round_trips() {
    let p = Problem::chest(12.0);
    let gamma = chest_phantom(Pathology::Effusion).on_mesh(&p.mesh);
    let a = p.dn(&gamma, Complex64::new(0.8, 0.4));
    let b = p.dn(&gamma, Complex64::new(0.8, 0.4));
    assert_eq!(a, b);
    assert_eq!(DnMap::parse(&a.to_text()).unwrap(), a);
}
