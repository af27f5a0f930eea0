//! Piecewise-linear finite elements for the complete electrode model.

use super::skyline::{reverse_cuthill_mckee, SkylineLdlt, SkylinePattern};
use super::{CurrentFrame, VoltageFrame};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::geometry::TriMesh;
use num_complex::Complex64;

/// Mesh-dependent data shared by every admittivity: element gradients,
/// electrode boundary integrals and the matrix envelope.
///
/// Unknowns are the node potentials followed by the voltages of electrodes
/// `1..L-1`; the last electrode is grounded during the solve and the result
/// is shifted so the voltages sum to zero.
#[derive(Debug, Clone)]
pub struct CemModel {
    n_nodes: usize,
    n_electrodes: usize,
    /// `perm[old] = new` into the envelope ordering.
    perm: Vec<usize>,
    pattern: SkylinePattern,
    /// Per triangle: the six lower-envelope positions and `area·∇φ_a·∇φ_b`.
    element_slots: Vec<[(usize, f64); 6]>,
    /// Contact-impedance contributions (already divided by z).
    boundary_values: Vec<Complex64>,
    /// Electrode lengths in model units.
    pub electrode_lengths: Vec<f64>,
}

const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 0), (2, 0), (2, 1)];

impl CemModel {
    /// `scale` converts mesh coordinates (mm) to model units.
    pub fn new(mesh: &TriMesh, contact: &[Complex64], scale: f64) -> Result<Self> {
        let n_nodes = mesh.vertices.len();
        let n_electrodes = contact.len();
        if n_electrodes < 2 {
            return invalid("need at least two electrodes");
        }
        if mesh.electrode_count() != n_electrodes {
            return invalid(format!(
                "mesh tags {} electrodes but {} contact impedances were given",
                mesh.electrode_count(),
                n_electrodes
            ));
        }
        if contact.iter().any(|z| !(z.re > 0.0)) {
            return invalid("contact impedances need a positive real part");
        }
        let pos = |i: usize| {
            let v = mesh.vertices[i];
            [v[0] * scale, v[1] * scale]
        };
        let n = n_nodes + n_electrodes - 1;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        let link = |a: usize, b: usize, adj: &mut Vec<Vec<usize>>| {
            if a != b && !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        };
        for t in &mesh.triangles {
            for k in 0..3 {
                link(t[k], t[(k + 1) % 3], &mut adj);
            }
        }
        let mut electrode_lengths = vec![0.0; n_electrodes];
        for &(a, b, tag) in &mesh.boundary_edges {
            if tag == 0 {
                continue;
            }
            let l = tag as usize - 1;
            let (pa, pb) = (pos(a), pos(b));
            electrode_lengths[l] += ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
            link(a, b, &mut adj);
            if l + 1 < n_electrodes {
                link(a, n_nodes + l, &mut adj);
                link(b, n_nodes + l, &mut adj);
            }
        }
        if electrode_lengths.iter().any(|&len| len <= 0.0) {
            return Err(Error::Geometry("an electrode has no boundary edges".into()));
        }
        let order = reverse_cuthill_mckee(&adj);
        let mut perm = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            perm[old] = new;
        }
        let permuted: Vec<Vec<usize>> = order.iter().map(|&old| adj[old].iter().map(|&w| perm[w]).collect()).collect();
        let pattern = SkylinePattern::from_adjacency(&permuted);
        let slot = |a: usize, b: usize| {
            let (i, j) = (perm[a], perm[b]);
            if i >= j {
                pattern.position(i, j)
            } else {
                pattern.position(j, i)
            }
        };

        let mut element_slots = Vec::with_capacity(mesh.triangles.len());
        for t in &mesh.triangles {
            let [p0, p1, p2] = t.map(pos);
            let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            let area = 0.5 * det;
            // ∇φ_k = (y_{k+1} - y_{k+2}, x_{k+2} - x_{k+1}) / det
            let ps = [p0, p1, p2];
            let grad: Vec<[f64; 2]> = (0..3)
                .map(|k| {
                    let (a, b) = (ps[(k + 1) % 3], ps[(k + 2) % 3]);
                    [(a[1] - b[1]) / det, (b[0] - a[0]) / det]
                })
                .collect();
            let mut slots = [(0usize, 0.0f64); 6];
            for (s, &(a, b)) in PAIRS.iter().enumerate() {
                let k = area * (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1]);
                slots[s] = (slot(t[a], t[b]), k);
            }
            element_slots.push(slots);
        }

        let mut boundary_values = vec![Complex64::new(0.0, 0.0); pattern.nnz];
        for &(a, b, tag) in &mesh.boundary_edges {
            if tag == 0 {
                continue;
            }
            let l = tag as usize - 1;
            let zinv = contact[l].inv();
            let (pa, pb) = (pos(a), pos(b));
            let len = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
            boundary_values[slot(a, a)] += zinv * len / 3.0;
            boundary_values[slot(b, b)] += zinv * len / 3.0;
            boundary_values[slot(a, b)] += zinv * len / 6.0;
            if l + 1 < n_electrodes {
                let e = n_nodes + l;
                boundary_values[slot(a, e)] -= zinv * len / 2.0;
                boundary_values[slot(b, e)] -= zinv * len / 2.0;
            }
        }
        for l in 0..n_electrodes - 1 {
            let e = n_nodes + l;
            boundary_values[slot(e, e)] += electrode_lengths[l] / contact[l];
        }
        Ok(Self { n_nodes, n_electrodes, perm, pattern, element_slots, boundary_values, electrode_lengths })
    }

    pub fn electrode_count(&self) -> usize {
        self.n_electrodes
    }

    pub fn node_count(&self) -> usize {
        self.n_nodes
    }

    /// Assembles and factors the system for per-triangle admittivities.
    pub fn factorize(&self, gamma: &[Complex64]) -> Result<CemSolver<'_>> {
        if gamma.len() != self.element_slots.len() {
            return invalid(format!("expected {} triangle values, got {}", self.element_slots.len(), gamma.len()));
        }
        if let Some(t) = gamma.iter().position(|g| !(g.re > 0.0) || g.im < 0.0 || !g.is_finite()) {
            return invalid(format!("admittivity {} on triangle {t} violates Re > 0, Im ≥ 0", gamma[t]));
        }
        let mut values = self.boundary_values.clone();
        for (slots, g) in self.element_slots.iter().zip(gamma) {
            for &(p, k) in slots {
                values[p] += g * k;
            }
        }
        let ldlt = SkylineLdlt::factor(self.pattern.clone(), values)?;
        Ok(CemSolver { model: self, ldlt })
    }
}

/// Electrode voltages plus the interior potential of one solve.
#[derive(Debug, Clone)]
pub struct CemSolution {
    pub voltages: VoltageFrame,
    /// Node potentials, shifted consistently with the zero-sum voltages.
    pub potential: Vec<Complex64>,
}

pub struct CemSolver<'a> {
    model: &'a CemModel,
    ldlt: SkylineLdlt,
}

impl CemSolver<'_> {
    pub fn solve_full(&self, frame: &CurrentFrame) -> Result<CemSolution> {
        let m = self.model;
        let l = m.n_electrodes;
        if frame.values.len() != l {
            return invalid(format!("frame has {} currents for {} electrodes", frame.values.len(), l));
        }
        let scale = frame.values.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::Singular("all-zero current frame".into()));
        }
        let sum: Complex64 = frame.values.iter().sum();
        if sum.norm() > 1e-9 * scale {
            return invalid(format!("currents of frame {} do not sum to zero ({sum})", frame.index));
        }
        let mut x = vec![Complex64::new(0.0, 0.0); m.pattern.n()];
        for e in 0..l - 1 {
            x[m.perm[m.n_nodes + e]] = frame.values[e];
        }
        self.ldlt.solve_in_place(&mut x);
        let mut u: Vec<Complex64> = (0..l - 1).map(|e| x[m.perm[m.n_nodes + e]]).collect();
        u.push(Complex64::new(0.0, 0.0));
        let mean = u.iter().sum::<Complex64>() / l as f64;
        for v in u.iter_mut() {
            *v -= mean;
        }
        let potential = (0..m.n_nodes).map(|i| x[m.perm[i]] - mean).collect();
        Ok(CemSolution { voltages: VoltageFrame { index: frame.index, values: u }, potential })
    }

    pub fn solve(&self, frame: &CurrentFrame) -> Result<VoltageFrame> {
        self.solve_full(frame).map(|s| s.voltages)
    }

    pub fn solve_frames(&self, frames: &[CurrentFrame], exec: Execution) -> Result<Vec<VoltageFrame>> {
        exec.map(frames, |f| self.solve(f)).into_iter().collect()
    }
}
