use dbar_eit::forward::Region;
use dbar_eit::geometry::{build_domain, build_zgrid, DomainKind, ZGrid};
use dbar_eit::prior::{q_from_gamma, CgoAt, LsSolver, PotentialField};
use dbar_eit::recovery::{compute_metrics, gamma_from_q, q_from_m, Route};
use num_complex::Complex64;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn disc_grid(m: u32) -> ZGrid {
    let d = build_domain(DomainKind::Disc, 2.0 * PI, 512).unwrap();
    build_zgrid(&d, m, 0.05).unwrap()
}

fn bump(grid: &ZGrid, amp: Complex64) -> Vec<Complex64> {
    grid.points()
        .iter()
        .map(|z| {
            let t = (z - Complex64::new(0.15, -0.2)).norm_sqr() / 0.49;
            ONE + if t < 1.0 { amp * (1.0 - 1.0 / (1.0 - t)).exp() } else { ZERO }
        })
        .collect()
}

fn identity(len: usize) -> CgoAt {
    CgoAt { m11: vec![ONE; len], m12: vec![ZERO; len], m21: vec![ZERO; len], m22: vec![ONE; len] }
}

fn rel_err_on_omega(a: &[Complex64], b: &[Complex64], grid: &ZGrid) -> f64 {
    let idx: Vec<usize> = (0..grid.len()).filter(|&i| grid.omega_mask[i]).collect();
    let num: f64 = idx.iter().map(|&i| (a[i] - b[i]).norm_sqr()).sum();
    let den: f64 = idx.iter().map(|&i| (b[i] - ONE).norm_sqr()).sum();
    (num / den).sqrt()
}

#[test]
fn identity_gives_zero_potential() {
    let grid = disc_grid(5);
    let (q, valid) = q_from_m(&identity(grid.len()), &grid).unwrap();
    assert!(valid.iter().all(|v| *v));
    assert_eq!(q, PotentialField::zeros(grid.len()));
}

#[test]
fn vanishing_denominator_is_flagged() {
    let grid = disc_grid(5);
    let mut m = identity(grid.len());
    let i = grid.omega_plus_indices().into_iter().find(|&i| grid.omega_mask[i]).unwrap();
    m.m22[i] = ZERO;
    let (q, valid) = q_from_m(&m, &grid).unwrap();
    assert!(!valid[i]);
    assert_eq!((q.q12[i], q.q21[i]), (ZERO, ZERO));
    assert_eq!(valid.iter().filter(|v| !**v).count(), 1);
}

#[test]
fn zero_potential_gives_unit_admittivity() {
    let grid = disc_grid(5);
    for route in [Route::Q12, Route::Q21] {
        let g = gamma_from_q(&PotentialField::zeros(grid.len()), &grid, route).unwrap();
        assert!(g.iter().all(|v| *v == ONE));
    }
}

#[test]
fn bump_round_trip() {
    let grid = disc_grid(6);
    let gamma = bump(&grid, Complex64::new(0.8, 0.3));
    let q = q_from_gamma(&gamma, &grid).unwrap();
    for route in [Route::Q12, Route::Q21] {
        let back = gamma_from_q(&q, &grid, route).unwrap();
        let err = rel_err_on_omega(&back, &gamma, &grid);
        assert!(err < 0.02, "{route:?}: {err}");
    }
}

#[test]
fn cgo_at_small_k_round_trip() {
    let grid = disc_grid(6);
    let gamma = bump(&grid, Complex64::new(0.5, 0.2));
    let ls = LsSolver::new(q_from_gamma(&gamma, &grid).unwrap(), &grid).unwrap();
    let m = ls.solve(Complex64::new(1e-3, 1e-3), &mut ls.scratch()).unwrap();
    let (q, valid) = q_from_m(&m, &grid).unwrap();
    assert!(valid.iter().all(|v| *v));
    for route in [Route::Q12, Route::Q21] {
        let back = gamma_from_q(&q, &grid, route).unwrap();
        let err = rel_err_on_omega(&back, &gamma, &grid);
        assert!(err < 0.05, "{route:?}: {err}");
    }
}

#[test]
fn metrics_examples() {
    let grid = disc_grid(5);
    let region = Region {
        label: "box".into(),
        polygon: vec![
            Complex64::new(-0.5, -0.5),
            Complex64::new(0.5, -0.5),
            Complex64::new(0.5, 0.5),
            Complex64::new(-0.5, 0.5),
        ],
    };
    let truth: Vec<Complex64> =
        grid.points().iter().map(|z| if region.contains(*z) { Complex64::new(2.0, 0.5) } else { ONE }).collect();
    let m = compute_metrics(&truth, &truth, &grid, std::slice::from_ref(&region)).unwrap();
    assert_eq!((m.rel_l2_re, m.rel_l2_im), (0.0, 0.0));
    assert_eq!(m.region_means[0], ("background".to_string(), ONE));
    assert_eq!(m.region_means[1], ("box".to_string(), Complex64::new(2.0, 0.5)));
    let scaled: Vec<Complex64> = truth.iter().map(|v| v * 1.1).collect();
    let m = compute_metrics(&scaled, &truth, &grid, &[region]).unwrap();
    assert!((m.rel_l2_re - 0.1).abs() < 1e-12 && (m.rel_l2_im - 0.1).abs() < 1e-12);
    assert!(m.to_text().starts_with("rel_l2_re "));
}
