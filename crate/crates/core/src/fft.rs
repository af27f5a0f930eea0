//! Aperiodic 2-D convolution on square grids by zero-padded FFT.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Discrete convolution `out[p] = Σ_q K(p - q) f[q]` over an `n × n` grid.
///
/// The kernel is sampled on index differences in `(-n, n)²` and embedded in a
/// `2n × 2n` periodic buffer, so the circular product equals the aperiodic
/// sum exactly. Any quadrature weight (e.g. `h²`) belongs in the kernel.
pub struct Convolver {
    n: usize,
    size: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// Kernel spectrum in transposed (column-major) layout, scaled by 1/size².
    kernel_hat: Vec<Complex64>,
}

/// Per-thread working memory for [`Convolver::apply`].
pub struct ConvScratch {
    buf: Vec<Complex64>,
    tbuf: Vec<Complex64>,
    fft_scratch: Vec<Complex64>,
}

impl std::fmt::Debug for Convolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolver").field("n", &self.n).finish()
    }
}

impl Convolver {
    /// `kernel(dr, dc)` is evaluated for row/column offsets in `(-n, n)`.
    pub fn new<K: Fn(isize, isize) -> Complex64>(n: usize, kernel: K) -> Self {
        let size = 2 * n;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(size);
        let ifft = planner.plan_fft_inverse(size);
        let zero = Complex64::new(0.0, 0.0);
        let mut kbuf = vec![zero; size * size];
        let ni = n as isize;
        for dr in (1 - ni)..ni {
            let r = dr.rem_euclid(size as isize) as usize;
            for dc in (1 - ni)..ni {
                let c = dc.rem_euclid(size as isize) as usize;
                kbuf[r * size + c] = kernel(dr, dc);
            }
        }
        let mut scratch = vec![zero; fft.get_inplace_scratch_len()];
        fft.process_with_scratch(&mut kbuf, &mut scratch);
        let mut tbuf = vec![zero; size * size];
        transpose(&kbuf, &mut tbuf, size, size);
        fft.process_with_scratch(&mut tbuf, &mut scratch);
        let norm = 1.0 / (size * size) as f64;
        for v in tbuf.iter_mut() {
            *v *= norm;
        }
        Self { n, size, fft, ifft, kernel_hat: tbuf }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scratch(&self) -> ConvScratch {
        let zero = Complex64::new(0.0, 0.0);
        let len = self.fft.get_inplace_scratch_len().max(self.ifft.get_inplace_scratch_len());
        ConvScratch {
            buf: vec![zero; self.size * self.size],
            tbuf: vec![zero; self.size * self.size],
            fft_scratch: vec![zero; len],
        }
    }

    /// Convolves `input` (row-major `n × n`) into `output`.
    pub fn apply(&self, input: &[Complex64], output: &mut [Complex64], s: &mut ConvScratch) {
        let (n, size) = (self.n, self.size);
        assert_eq!(input.len(), n * n);
        assert_eq!(output.len(), n * n);
        let zero = Complex64::new(0.0, 0.0);
        for r in 0..n {
            let row = &mut s.buf[r * size..(r + 1) * size];
            row[..n].copy_from_slice(&input[r * n..(r + 1) * n]);
            row[n..].fill(zero);
        }
        // only the first n rows carry data
        self.fft.process_with_scratch(&mut s.buf[..n * size], &mut s.fft_scratch);
        for c in 0..size {
            let trow = &mut s.tbuf[c * size..(c + 1) * size];
            for r in 0..n {
                trow[r] = s.buf[r * size + c];
            }
            trow[n..].fill(zero);
        }
        self.fft.process_with_scratch(&mut s.tbuf, &mut s.fft_scratch);
        for (v, k) in s.tbuf.iter_mut().zip(&self.kernel_hat) {
            *v *= k;
        }
        self.ifft.process_with_scratch(&mut s.tbuf, &mut s.fft_scratch);
        for r in 0..n {
            for c in 0..size {
                s.buf[r * size + c] = s.tbuf[c * size + r];
            }
        }
        self.ifft.process_with_scratch(&mut s.buf[..n * size], &mut s.fft_scratch);
        for r in 0..n {
            output[r * n..(r + 1) * n].copy_from_slice(&s.buf[r * size..r * size + n]);
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn direct(n: usize, k: &dyn Fn(isize, isize) -> Complex64, f: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for rr in 0..n {
                    for cc in 0..n {
                        acc += k(r as isize - rr as isize, c as isize - cc as isize) * f[rr * n + cc];
                    }
                }
                out[r * n + c] = acc;
            }
        }
        out
    }

    proptest! {
        #[test]
        fn matches_direct_sum(seed in 0u64..1000, n in 2usize..9) {
            let kernel = move |dr: isize, dc: isize| {
                if dr == 0 && dc == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(dc as f64, -(dr as f64)).inv() * (1.0 + seed as f64 * 1e-3)
                }
            };
            let f: Vec<Complex64> = (0..n * n)
                .map(|i| Complex64::new(((i as u64 * 7 + seed) % 13) as f64 - 6.0, ((i * 3) % 5) as f64))
                .collect();
            let conv = Convolver::new(n, kernel);
            let mut out = vec![Complex64::new(0.0, 0.0); n * n];
            let mut s = conv.scratch();
            conv.apply(&f, &mut out, &mut s);
            let want = direct(n, &kernel, &f);
            for (a, b) in out.iter().zip(&want) {
                prop_assert!((a - b).norm() < 1e-10 * (1.0 + b.norm()));
            }
        }
    }
}
