//! The ∂̄_k equation for `M(z, k)` on a k-grid, in standard and prior-weighted form.
//!
//! For fixed `z` the pair `(M₁₁, M₁₂)` solves
//! `M₁₁ = c₁ + K[M₁₂(k̄) e(z,-k) S₂₁]`, `M₁₂ = c₂ + K[M₁₁(k̄) e(z,k̄) S₁₂]`
//! with `K f = (1/πk) ∗ f`, and `(M₂₁, M₂₂)` solves the same system with
//! constants `(c₃, c₄)`. The reflection `k ↦ k̄` acts on grid indices only,
//! so the map from constants to solutions is complex-linear: two solves per
//! `z` with constants `(1, 0)` and `(0, 1)` give all four entries.

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::fft::{ConvScratch, Convolver};
use crate::geometry::ZGrid;
use crate::gmres::{gmres, GmresConfig};
use crate::prior::{e_phase, CgoAt};
use crate::scattering::{KGrid, ScatteringData};
use num_complex::Complex64;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Constant terms of the D-bar systems per z-grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct MintField {
    /// `[M11, M12, M21, M22]`.
    pub m: [Vec<Complex64>; 4],
    pub alpha: f64,
    pub radius2: f64,
}

impl MintField {
    /// `(1, 0, 0, 1)` everywhere: the standard method.
    pub fn identity(len: usize, radius2: f64) -> Self {
        Self { m: [vec![ONE; len], vec![ZERO; len], vec![ZERO; len], vec![ONE; len]], alpha: 1.0, radius2 }
    }

    pub fn len(&self) -> usize {
        self.m[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.m[0].is_empty()
    }

    fn at(&self, i: usize) -> [Complex64; 4] {
        [self.m[0][i], self.m[1][i], self.m[2][i], self.m[3][i]]
    }
}

/// `α·δ_ij + (1 - α)·A(M^prior_ij)` where `mean` holds the disc averages
/// `A` of the prior CGO solutions. `α = 1` gives the exact identity.
pub fn compute_mint(mean: &[Vec<Complex64>; 4], alpha: f64, radius2: f64) -> Result<MintField> {
    if !(0.0..=1.0).contains(&alpha) {
        return invalid(format!("weight α must lie in [0, 1], got {alpha}"));
    }
    let len = mean[0].len();
    if mean.iter().any(|m| m.len() != len) {
        return invalid("prior averages differ in length");
    }
    if alpha == 1.0 {
        return Ok(MintField::identity(len, radius2));
    }
    let blend = |m: &Vec<Complex64>, diag: bool| -> Vec<Complex64> {
        let base = if diag { alpha } else { 0.0 };
        m.iter().map(|v| base + (1.0 - alpha) * v).collect()
    };
    Ok(MintField {
        m: [blend(&mean[0], true), blend(&mean[1], false), blend(&mean[2], false), blend(&mean[3], true)],
        alpha,
        radius2,
    })
}

/// Solutions of the D-bar pair for constants `(1, 0)` and `(0, 1)` at one `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitSolutions {
    /// `(X(k), Y(k))` on the whole k-grid for constants `(1, 0)`.
    pub first: (Vec<Complex64>, Vec<Complex64>),
    /// Same for constants `(0, 1)`.
    pub second: (Vec<Complex64>, Vec<Complex64>),
}

/// `M(z, 0)` on the z-grid with a validity flag per point.
#[derive(Debug, Clone, PartialEq)]
pub struct CgoOrigin {
    pub m: CgoAt,
    pub valid: Vec<bool>,
}

/// FFT-based solver for the D-bar pair on a fixed scattering dataset.
pub struct DbarSolver {
    grid: KGrid,
    points: Vec<Complex64>,
    conj: Vec<usize>,
    s12: Vec<Complex64>,
    s21: Vec<Complex64>,
    /// Grid indices where `S ≠ 0`.
    support: Vec<usize>,
    cauchy: Convolver,
    pub gmres: GmresConfig,
}

pub struct DbarScratch {
    conv: ConvScratch,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    tmp: Vec<Complex64>,
    out: Vec<Complex64>,
}

impl DbarSolver {
    /// Inactive grid points and points beyond `radius2` contribute nothing.
    pub fn new(s: &ScatteringData) -> Self {
        let grid = s.grid.clone();
        let mask = grid.disc_mask(s.radius2);
        let keep = |i: usize, v: Complex64| if s.active[i] && mask[i] { v } else { ZERO };
        let s12: Vec<Complex64> = (0..grid.len()).map(|i| keep(i, s.s12[i])).collect();
        let s21: Vec<Complex64> = (0..grid.len()).map(|i| keep(i, s.s21[i])).collect();
        let support = (0..grid.len()).filter(|&i| s12[i] != ZERO || s21[i] != ZERO).collect();
        let h = grid.h;
        let cauchy = Convolver::new(grid.n, |dr, dc| {
            if dr == 0 && dc == 0 {
                ZERO
            } else {
                h / (PI * Complex64::new(dc as f64, dr as f64))
            }
        });
        Self {
            points: (0..grid.len()).map(|i| grid.point(i)).collect(),
            conj: (0..grid.len()).map(|i| grid.conj_index(i)).collect(),
            grid,
            s12,
            s21,
            support,
            cauchy,
            gmres: GmresConfig::default(),
        }
    }

    pub fn grid(&self) -> &KGrid {
        &self.grid
    }

    pub fn scratch(&self) -> DbarScratch {
        let len = self.grid.len();
        DbarScratch {
            conv: self.cauchy.scratch(),
            a: vec![ZERO; len],
            b: vec![ZERO; len],
            tmp: vec![ZERO; len],
            out: vec![ZERO; len],
        }
    }

    /// `out = K[v(k̄)·coef]`.
    fn apply_k(&self, v: &[Complex64], coef: &[Complex64], s: &mut DbarScratch, out: &mut [Complex64]) {
        for (i, t) in s.tmp.iter_mut().enumerate() {
            *t = v[self.conj[i]] * coef[i];
        }
        self.cauchy.apply(&s.tmp, out, &mut s.conv);
    }

    fn solve_one(&self, c: (Complex64, Complex64), s: &mut DbarScratch) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let len = self.grid.len();
        let mut rhs = vec![c.0; 2 * len];
        rhs[len..].fill(c.1);
        let mut x = rhs.clone();
        let (a, b) = (std::mem::take(&mut s.a), std::mem::take(&mut s.b));
        let mut out = std::mem::take(&mut s.out);
        let outcome = gmres(
            |v, av| {
                let (vx, vy) = v.split_at(len);
                self.apply_k(vy, &a, s, &mut out);
                for i in 0..len {
                    av[i] = vx[i] - out[i];
                }
                self.apply_k(vx, &b, s, &mut out);
                for i in 0..len {
                    av[len + i] = vy[i] - out[i];
                }
            },
            &rhs,
            &mut x,
            &self.gmres,
        );
        (s.a, s.b, s.out) = (a, b, out);
        if !outcome.converged {
            return Err(Error::NoConvergence(format!("D-bar solve: residual {:.2e}", outcome.residual)));
        }
        let y = x.split_off(len);
        Ok((x, y))
    }

    fn set_phases(&self, z: Complex64, s: &mut DbarScratch) {
        for i in 0..self.grid.len() {
            let k = self.points[i];
            s.a[i] = if self.s21[i] == ZERO { ZERO } else { e_phase(z, -k) * self.s21[i] };
            s.b[i] = if self.s12[i] == ZERO { ZERO } else { e_phase(z, k.conj()) * self.s12[i] };
        }
    }

    /// Full k-slices of the two unit solutions at `z`.
    pub fn unit_solutions(&self, z: Complex64, s: &mut DbarScratch) -> Result<UnitSolutions> {
        self.set_phases(z, s);
        let first = self.solve_one((ONE, ZERO), s)?;
        let second = self.solve_one((ZERO, ONE), s)?;
        Ok(UnitSolutions { first, second })
    }

    /// `(X(0), Y(0))` from the integral representation
    /// `X(0) = c - (1/π) Σ h² Y(k̄)e(z,-k)S₂₁(k)/k`, likewise for `Y`.
    fn at_origin(
        &self,
        c: (Complex64, Complex64),
        x: &[Complex64],
        y: &[Complex64],
        s: &DbarScratch,
    ) -> (Complex64, Complex64) {
        let w = self.grid.h * self.grid.h / PI;
        let (mut sx, mut sy) = (ZERO, ZERO);
        for &i in &self.support {
            let k = self.points[i];
            let j = self.conj[i];
            sx += y[j] * s.a[i] / k;
            sy += x[j] * s.b[i] / k;
        }
        (c.0 - w * sx, c.1 - w * sy)
    }

    /// `M(z, 0)` for the constants `mint = [c₁₁, c₁₂, c₂₁, c₂₂]`.
    pub fn solve_origin(&self, z: Complex64, mint: [Complex64; 4], s: &mut DbarScratch) -> Result<[Complex64; 4]> {
        if self.support.is_empty() {
            return Ok(mint);
        }
        let u = self.unit_solutions(z, s)?;
        let (x1, y1) = self.at_origin((ONE, ZERO), &u.first.0, &u.first.1, s);
        let (x2, y2) = self.at_origin((ZERO, ONE), &u.second.0, &u.second.1, s);
        Ok([
            mint[0] * x1 + mint[1] * x2,
            mint[0] * y1 + mint[1] * y2,
            mint[2] * x1 + mint[3] * x2,
            mint[2] * y1 + mint[3] * y2,
        ])
    }
}

/// `M(z, 0)` at every Ω⁺ point of `grid`; other points keep the constants
/// of `mint`. Points whose solve fails are flagged invalid.
pub fn solve_dbar(s: &ScatteringData, mint: &MintField, grid: &ZGrid, exec: Execution) -> Result<CgoOrigin> {
    if mint.len() != grid.len() {
        return invalid("M^int does not match the z-grid");
    }
    if s.radius2 > mint.radius2 + 1e-12 && mint.alpha < 1.0 {
        return invalid(format!("scattering radius {} exceeds the M^int radius {}", s.radius2, mint.radius2));
    }
    let solver = DbarSolver::new(s);
    let idx = grid.omega_plus_indices();
    let results = exec.map_with(&idx, || solver.scratch(), |sc, &i| solver.solve_origin(grid.point(i), mint.at(i), sc));
    let mut m =
        CgoAt { m11: mint.m[0].clone(), m12: mint.m[1].clone(), m21: mint.m[2].clone(), m22: mint.m[3].clone() };
    let mut valid = vec![true; grid.len()];
    for (&i, r) in idx.iter().zip(results) {
        match r {
            Ok(v) if v.iter().all(|x| x.is_finite()) => {
                m.m11[i] = v[0];
                m.m12[i] = v[1];
                m.m21[i] = v[2];
                m.m22[i] = v[3];
            }
            Ok(_) => {
                log::warn!("D-bar solve at z index {i} is not finite");
                valid[i] = false;
            }
            Err(e) => {
                log::warn!("D-bar solve at z index {i}: {e}");
                valid[i] = false;
            }
        }
    }
    Ok(CgoOrigin { m, valid })
}
