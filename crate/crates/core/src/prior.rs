//! Spatial prior: region means, mollification, the potential `Q` of a smooth
//! admittivity, CGO solutions of `D_k M = QM` and their scattering data.

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::fft::{ConvScratch, Convolver};
use crate::forward::{PhantomSpec, Region};
use crate::geometry::ZGrid;
use crate::gmres::{gmres, GmresConfig};
use crate::scattering::{KGrid, ScatteringData, ScatteringSource};
use num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `e(z, k) = exp(i(kz + k̄z̄)) = exp(2i Re(kz))`.
#[inline]
pub fn e_phase(z: Complex64, k: Complex64) -> Complex64 {
    let t = 2.0 * (k * z).re;
    Complex64::new(t.cos(), t.sin())
}

/// Piecewise-constant prior: each region gets the mean of `initial` over its
/// grid mask inside Ω, the background the mean over the rest of Ω.
pub fn build_prior(initial: &[Complex64], grid: &ZGrid, regions: &[Region]) -> Result<PhantomSpec> {
    if initial.len() != grid.len() {
        return invalid("initial reconstruction does not match the grid");
    }
    let masks: Vec<Vec<bool>> = regions.iter().map(|r| grid.polygon_mask(&r.polygon)).collect();
    let mean = |pick: &dyn Fn(usize) -> bool, label: &str| -> Result<Complex64> {
        let (mut sum, mut count) = (ZERO, 0usize);
        for i in (0..grid.len()).filter(|&i| grid.omega_mask[i] && pick(i)) {
            sum += initial[i];
            count += 1;
        }
        if count == 0 {
            return invalid(format!("prior region '{label}' covers no grid points"));
        }
        Ok(sum / count as f64)
    };
    let background = mean(&|i| masks.iter().all(|m| !m[i]), "background")?;
    let mut out = PhantomSpec::homogeneous(background);
    for (r, m) in regions.iter().zip(&masks) {
        let v = mean(&|i| m[i], &r.label)?;
        out.regions.push((r.clone(), v));
    }
    Ok(out)
}

/// Separable Gaussian smoothing with standard deviation `width` grid cells,
/// truncated at 4σ. Near the grid edge the kernel is renormalized over the
/// samples that exist, so constants are preserved everywhere.
pub fn mollify(values: &[Complex64], n: usize, width: f64) -> Result<Vec<Complex64>> {
    if values.len() != n * n {
        return invalid("field does not match the grid");
    }
    if !(width > 0.0) {
        return invalid(format!("mollifier width must be positive, got {width}"));
    }
    let reach = (4.0 * width).ceil() as isize;
    let taps: Vec<f64> = (-reach..=reach).map(|d| (-0.5 * (d as f64 / width).powi(2)).exp()).collect();
    let pass = |src: &[Complex64], stride: usize, step: usize| -> Vec<Complex64> {
        let mut out = vec![ZERO; src.len()];
        for line in 0..n {
            for pos in 0..n {
                let (mut acc, mut wsum) = (ZERO, 0.0);
                for (t, w) in taps.iter().enumerate() {
                    let q = pos as isize + t as isize - reach;
                    if (0..n as isize).contains(&q) {
                        acc += src[line * stride + q as usize * step] * *w;
                        wsum += w;
                    }
                }
                out[line * stride + pos * step] = acc / wsum;
            }
        }
        out
    };
    let rows = pass(values, n, 1);
    Ok(pass(&rows, 1, n))
}

/// Off-diagonal entries of the matrix potential on a z-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub q12: Vec<Complex64>,
    pub q21: Vec<Complex64>,
}

impl PotentialField {
    pub fn zeros(len: usize) -> Self {
        Self { q12: vec![ZERO; len], q21: vec![ZERO; len] }
    }

    pub fn max_abs(&self) -> f64 {
        self.q12.iter().chain(&self.q21).map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Centered-difference `∂_z` and `∂̄_z` of a grid field at `(r, c)`,
/// one-sided at the grid edge.
pub(crate) fn wirtinger(f: &[Complex64], n: usize, h: f64, r: usize, c: usize) -> (Complex64, Complex64) {
    let diff = |a: usize, b: usize, span: f64| (f[a] - f[b]) / (span * h);
    let idx = |r: usize, c: usize| r * n + c;
    let fx = match c {
        0 => diff(idx(r, 1), idx(r, 0), 1.0),
        c if c == n - 1 => diff(idx(r, c), idx(r, c - 1), 1.0),
        c => diff(idx(r, c + 1), idx(r, c - 1), 2.0),
    };
    let fy = match r {
        0 => diff(idx(1, c), idx(0, c), 1.0),
        r if r == n - 1 => diff(idx(r, c), idx(r - 1, c), 1.0),
        r => diff(idx(r + 1, c), idx(r - 1, c), 2.0),
    };
    (0.5 * (fx - I * fy), 0.5 * (fx + I * fy))
}

/// `Q₁₂ = -½ ∂_z log γ`, `Q₂₁ = -½ ∂̄_z log γ` by centered differences,
/// zero outside Ω.
pub fn q_from_gamma(gamma: &[Complex64], grid: &ZGrid) -> Result<PotentialField> {
    let n = grid.n;
    if gamma.len() != grid.len() {
        return invalid("admittivity does not match the grid");
    }
    if let Some(bad) = gamma.iter().find(|g| !(g.re > 0.0) || !g.im.is_finite()) {
        return invalid(format!("conductivity must be positive, found {bad}"));
    }
    let log: Vec<Complex64> = gamma.iter().map(|g| g.ln()).collect();
    let mut q = PotentialField::zeros(grid.len());
    for i in (0..grid.len()).filter(|&i| grid.omega_mask[i]) {
        let (dz, dzb) = wirtinger(&log, n, grid.h, i / n, i % n);
        q.q12[i] = -0.5 * dz;
        q.q21[i] = -0.5 * dzb;
    }
    Ok(q)
}

/// Composite Simpson weights of an `n × n` grid with step `h`; the last row
/// and column (beyond the odd-length rule) get weight zero.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let m = if n.is_multiple_of(2) { n - 1 } else { n };
    let line: Vec<f64> = (0..n)
        .map(|i| match i {
            i if i >= m => 0.0,
            0 => h / 3.0,
            i if i == m - 1 => h / 3.0,
            i if i % 2 == 1 => 4.0 * h / 3.0,
            _ => 2.0 * h / 3.0,
        })
        .collect();
    (0..n * n).map(|i| line[i / n] * line[i % n]).collect()
}

/// `M(·, k)` on the full z-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CgoAt {
    pub m11: Vec<Complex64>,
    pub m12: Vec<Complex64>,
    pub m21: Vec<Complex64>,
    pub m22: Vec<Complex64>,
}

/// Lippmann–Schwinger solver for `D_k M = QM` with FFT-applied kernels
/// `1/(πz)` and `1/(πz̄)`.
pub struct LsSolver {
    n: usize,
    points: Vec<Complex64>,
    q: PotentialField,
    weights: Vec<f64>,
    cauchy: Convolver,
    cauchy_bar: Convolver,
    pub gmres: GmresConfig,
}

pub struct LsScratch {
    conv: ConvScratch,
    tmp: Vec<Complex64>,
    out: Vec<Complex64>,
}

impl LsSolver {
    pub fn new(q: PotentialField, grid: &ZGrid) -> Result<Self> {
        let n = grid.n;
        if q.q12.len() != grid.len() || q.q21.len() != grid.len() {
            return invalid("potential does not match the grid");
        }
        let h = grid.h;
        let kern = |conj: bool| {
            move |dr: isize, dc: isize| {
                if dr == 0 && dc == 0 {
                    return ZERO;
                }
                let d = Complex64::new(dc as f64, dr as f64);
                let d = if conj { d.conj() } else { d };
                h / (PI * d)
            }
        };
        Ok(Self {
            n,
            points: grid.points(),
            q,
            weights: simpson_weights(n, h),
            cauchy: Convolver::new(n, kern(false)),
            cauchy_bar: Convolver::new(n, kern(true)),
            gmres: GmresConfig::default(),
        })
    }

    pub fn scratch(&self) -> LsScratch {
        let len = self.n * self.n;
        LsScratch { conv: self.cauchy.scratch(), tmp: vec![ZERO; len], out: vec![ZERO; len] }
    }

    /// `out = ph_out · K * (ph_in · coef · f)` with `K = 1/(πz)` or `1/(πz̄)`.
    #[allow(clippy::too_many_arguments)]
    fn modulated(
        &self,
        bar: bool,
        coef: &[Complex64],
        f: Option<&[Complex64]>,
        ph_in: Option<&[Complex64]>,
        ph_out: Option<&[Complex64]>,
        s: &mut LsScratch,
        out: &mut [Complex64],
    ) {
        for i in 0..coef.len() {
            let mut v = coef[i];
            if let Some(f) = f {
                v *= f[i];
            }
            if let Some(p) = ph_in {
                v *= p[i];
            }
            s.tmp[i] = v;
        }
        let conv = if bar { &self.cauchy_bar } else { &self.cauchy };
        conv.apply(&s.tmp, out, &mut s.conv);
        if let Some(p) = ph_out {
            for (o, p) in out.iter_mut().zip(p) {
                *o *= p;
            }
        }
    }

    /// Solves both decoupled systems at one `k`.
    pub fn solve(&self, k: Complex64, s: &mut LsScratch) -> Result<CgoAt> {
        let len = self.n * self.n;
        let ep: Vec<Complex64> = self.points.iter().map(|&z| e_phase(z, k)).collect();
        let em: Vec<Complex64> = ep.iter().map(|v| v.conj()).collect();
        let kb = k.conj();
        let fp: Vec<Complex64> = self.points.iter().map(|&z| e_phase(z, kb)).collect();
        let fm: Vec<Complex64> = fp.iter().map(|v| v.conj()).collect();
        let q = &self.q;

        // column 1: a = M11 - 1, b = M21
        //   a - K*(Q12 b) = 0,  b - e_{-k} K̄*(e_k Q21 a) = e_{-k} K̄*(e_k Q21)
        let mut rhs = vec![ZERO; 2 * len];
        let mut out = std::mem::take(&mut s.out);
        self.modulated(true, &q.q21, None, Some(&ep), Some(&em), s, &mut out);
        rhs[len..].copy_from_slice(&out);
        let mut x = vec![ZERO; 2 * len];
        let outcome = gmres(
            |v, av| {
                let (a, b) = v.split_at(len);
                self.modulated(false, &q.q12, Some(b), None, None, s, &mut out);
                for i in 0..len {
                    av[i] = a[i] - out[i];
                }
                self.modulated(true, &q.q21, Some(a), Some(&ep), Some(&em), s, &mut out);
                for i in 0..len {
                    av[len + i] = b[i] - out[i];
                }
            },
            &rhs,
            &mut x,
            &self.gmres,
        );
        if !outcome.converged {
            s.out = out;
            return Err(Error::NoConvergence(format!(
                "Lippmann–Schwinger solve at k = {k}: residual {:.2e}",
                outcome.residual
            )));
        }
        let m11: Vec<Complex64> = x[..len].iter().map(|v| v + ONE).collect();
        let m21 = x[len..].to_vec();

        // column 2: c = M12, d = M22 - 1
        //   c - e_{k̄} K*(e_{-k̄} Q12 d) = e_{k̄} K*(e_{-k̄} Q12),  d - K̄*(Q21 c) = 0
        self.modulated(false, &q.q12, None, Some(&fm), Some(&fp), s, &mut out);
        rhs[..len].copy_from_slice(&out);
        rhs[len..].fill(ZERO);
        x.fill(ZERO);
        let outcome = gmres(
            |v, av| {
                let (c, d) = v.split_at(len);
                self.modulated(false, &q.q12, Some(d), Some(&fm), Some(&fp), s, &mut out);
                for i in 0..len {
                    av[i] = c[i] - out[i];
                }
                self.modulated(true, &q.q21, Some(c), None, None, s, &mut out);
                for i in 0..len {
                    av[len + i] = d[i] - out[i];
                }
            },
            &rhs,
            &mut x,
            &self.gmres,
        );
        s.out = out;
        if !outcome.converged {
            return Err(Error::NoConvergence(format!(
                "Lippmann–Schwinger solve at k = {k}: residual {:.2e}",
                outcome.residual
            )));
        }
        let m12 = x[..len].to_vec();
        let m22: Vec<Complex64> = x[len..].iter().map(|v| v + ONE).collect();
        Ok(CgoAt { m11, m12, m21, m22 })
    }

    /// `S₁₂ = (i/π)∫ Q₁₂ e(z,-k̄) M₂₂`, `S₂₁ = -(i/π)∫ Q₂₁ e(z,k) M₁₁` by Simpson's rule.
    pub fn scattering(&self, k: Complex64, m: &CgoAt) -> (Complex64, Complex64) {
        let (mut s12, mut s21) = (ZERO, ZERO);
        for i in 0..self.points.len() {
            let w = self.weights[i];
            if w == 0.0 {
                continue;
            }
            let z = self.points[i];
            if self.q.q12[i] != ZERO {
                s12 += self.q.q12[i] * e_phase(z, -k.conj()) * m.m22[i] * w;
            }
            if self.q.q21[i] != ZERO {
                s21 += self.q.q21[i] * e_phase(z, k) * m.m11[i] * w;
            }
        }
        (I / PI * s12, -I / PI * s21)
    }
}

/// Prior scattering data on `|k| ≤ r2` and the disc averages of `M^prior`.
#[derive(Debug, Clone)]
pub struct PriorScattering {
    pub scattering: ScatteringData,
    /// `(1/#k) Σ_k M_ij(z, k)` over the solved k points, per grid point,
    /// ordered `[M11, M12, M21, M22]`.
    pub mean: [Vec<Complex64>; 4],
    pub dropped: Vec<usize>,
}

const CHUNK: usize = 16;

/// Solves the LS systems for every grid `k` with `|k| ≤ r2`. The average is
/// accumulated in k order, so the result does not depend on `exec`.
pub fn prior_scattering(solver: &LsSolver, kgrid: &KGrid, r2: f64, exec: Execution) -> Result<PriorScattering> {
    let len = solver.n * solver.n;
    let mask = kgrid.disc_mask(r2);
    let idx: Vec<usize> = (0..kgrid.len()).filter(|&i| mask[i]).collect();
    let mut data = ScatteringData::zeros(kgrid.clone(), ScatteringSource::Prior, r2);
    let mut mean = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
    let mut dropped = Vec::new();
    let mut count = 0usize;
    for chunk in idx.chunks(CHUNK) {
        let results = exec.map_with(
            chunk,
            || solver.scratch(),
            |s, &i| {
                let k = kgrid.point(i);
                solver.solve(k, s).map(|m| {
                    let sc = solver.scattering(k, &m);
                    (m, sc)
                })
            },
        );
        for (&i, r) in chunk.iter().zip(results) {
            match r {
                Ok((m, (a, b))) => {
                    data.s12[i] = a;
                    data.s21[i] = b;
                    data.active[i] = true;
                    for (acc, f) in mean.iter_mut().zip([&m.m11, &m.m12, &m.m21, &m.m22]) {
                        for (x, y) in acc.iter_mut().zip(f) {
                            *x += y;
                        }
                    }
                    count += 1;
                }
                Err(e) => {
                    log::warn!("prior k point {i} dropped: {e}");
                    dropped.push(i);
                }
            }
        }
    }
    if count == 0 {
        return Err(Error::NoConvergence("no prior k point could be solved".into()));
    }
    for acc in mean.iter_mut() {
        for v in acc.iter_mut() {
            *v /= count as f64;
        }
    }
    Ok(PriorScattering { scattering: data, mean, dropped })
}
