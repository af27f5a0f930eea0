use num_complex::Complex64;

/// Uniform `n × n` grid in the k-plane, offset by half a step so that no
/// sample sits at `k = 0`. Index `r * n + c` is
/// `((c - n/2 + ½) + i(r - n/2 + ½))·h`; reflection `k ↦ k̄` maps row `r`
/// to `n - 1 - r`.
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    pub n: usize,
    pub h: f64,
}

impl KGrid {
    /// Grid whose disc of radius `radius` is just covered by `n = 2^exp` points per side.
    pub fn covering(exp: u32, radius: f64) -> Self {
        let n = 1usize << exp;
        Self { n, h: radius / (n / 2 - 1) as f64 }
    }

    /// Smallest power-of-two grid with step `h` whose points cover the disc of radius `radius`.
    pub fn with_step(h: f64, radius: f64) -> Self {
        let mut n = 4usize;
        while ((n / 2 - 1) as f64) * h < radius * (1.0 - 1e-12) {
            n *= 2;
        }
        Self { n, h }
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn point(&self, idx: usize) -> Complex64 {
        let (r, c) = (idx / self.n, idx % self.n);
        let half = self.n as f64 / 2.0 - 0.5;
        Complex64::new((c as f64 - half) * self.h, (r as f64 - half) * self.h)
    }

    /// Index of `k̄` for the point at `idx`.
    pub fn conj_index(&self, idx: usize) -> usize {
        let (r, c) = (idx / self.n, idx % self.n);
        (self.n - 1 - r) * self.n + c
    }

    /// Points with `|k| ≤ radius`.
    pub fn disc_mask(&self, radius: f64) -> Vec<bool> {
        (0..self.len()).map(|i| self.point(i).norm() <= radius).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_offset() {
        let g = KGrid::covering(4, 3.0);
        for i in 0..g.len() {
            let k = g.point(i);
            assert!(k.norm() > 0.0);
            assert!((g.point(g.conj_index(i)) - k.conj()).norm() < 1e-15);
            let opp = g.len() - 1 - i;
            assert!((g.point(opp) + k).norm() < 1e-15);
        }
        let mask = g.disc_mask(3.0);
        let edge = (0..g.len()).filter(|&i| mask[i]).map(|i| g.point(i).norm()).fold(0.0, f64::max);
        assert!(edge > 3.0 - g.h && edge <= 3.0);
    }

    #[test]
    fn step_grids_nest() {
        let small = KGrid::with_step(0.3, 4.5);
        let big = KGrid::with_step(0.3, 8.5);
        assert_eq!((small.n, big.n), (32, 64));
        let off = (big.n - small.n) / 2;
        for i in 0..small.len() {
            let j = (i / small.n + off) * big.n + i % small.n + off;
            assert_eq!(small.point(i), big.point(j));
        }
    }
}
