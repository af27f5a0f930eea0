//! Restarted GMRES for complex linear operators applied matrix-free.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct GmresConfig {
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self { tol: 1e-6, restart: 40, max_iter: 400 }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub iterations: usize,
    /// Final relative residual ‖b - Ax‖ / ‖b‖.
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `A x = b` in place, starting from the contents of `x`.
pub fn gmres<A>(mut apply: A, b: &[Complex64], x: &mut [Complex64], cfg: &GmresConfig) -> GmresOutcome
where
    A: FnMut(&[Complex64], &mut [Complex64]),
{
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.fill(zero);
        return GmresOutcome { iterations: 0, residual: 0.0, converged: true };
    }
    let m = cfg.restart.max(1);
    let mut basis: Vec<Vec<Complex64>> = (0..=m).map(|_| vec![zero; n]).collect();
    let mut h = vec![zero; (m + 1) * m];
    let mut cs = vec![0.0f64; m];
    let mut sn = vec![zero; m];
    let mut g = vec![zero; m + 1];
    let mut w = vec![zero; n];
    let mut total = 0usize;

    loop {
        apply(x, &mut w);
        for i in 0..n {
            basis[0][i] = b[i] - w[i];
        }
        let beta = norm(&basis[0]);
        let mut rel = beta / bnorm;
        if rel <= cfg.tol || total >= cfg.max_iter {
            return GmresOutcome { iterations: total, residual: rel, converged: rel <= cfg.tol };
        }
        for v in basis[0].iter_mut() {
            *v /= beta;
        }
        g.fill(zero);
        g[0] = Complex64::new(beta, 0.0);
        let mut used = 0;
        for j in 0..m {
            let (head, tail) = basis.split_at_mut(j + 1);
            apply(&head[j], &mut w);
            // modified Gram–Schmidt
            for (i, vi) in head.iter().enumerate() {
                let hij = dot(vi, &w);
                h[i * m + j] = hij;
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * vk;
                }
            }
            let hnext = norm(&w);
            h[(j + 1) * m + j] = Complex64::new(hnext, 0.0);
            if hnext > 0.0 {
                for (t, wk) in tail[0].iter_mut().zip(&w) {
                    *t = wk / hnext;
                }
            }
            for i in 0..j {
                let a = h[i * m + j];
                let bb = h[(i + 1) * m + j];
                h[i * m + j] = a * cs[i] + sn[i] * bb;
                h[(i + 1) * m + j] = -sn[i].conj() * a + bb * cs[i];
            }
            let a = h[j * m + j];
            let bb = h[(j + 1) * m + j];
            let r = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if r == 0.0 {
                cs[j] = 1.0;
                sn[j] = zero;
            } else {
                cs[j] = a.norm() / r;
                let phase = if a.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { a / a.norm() };
                sn[j] = phase * bb.conj() / r;
            }
            h[j * m + j] = cs[j] * a + sn[j] * bb;
            h[(j + 1) * m + j] = zero;
            g[j + 1] = -sn[j].conj() * g[j];
            g[j] *= cs[j];
            used = j + 1;
            total += 1;
            rel = g[j + 1].norm() / bnorm;
            if rel <= cfg.tol || total >= cfg.max_iter || hnext == 0.0 {
                break;
            }
        }
        // back substitution on the triangular Hessenberg block
        let mut y = vec![zero; used];
        for i in (0..used).rev() {
            let mut acc = g[i];
            for k in (i + 1)..used {
                acc -= h[i * m + k] * y[k];
            }
            y[i] = acc / h[i * m + i];
        }
        for (k, yk) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[k]) {
                *xi += yk * vi;
            }
        }
        if rel <= cfg.tol || total >= cfg.max_iter {
            // confirm with a true residual on the next pass
            apply(x, &mut w);
            let res = b.iter().zip(&w).map(|(bi, wi)| (bi - wi).norm_sqr()).sum::<f64>().sqrt() / bnorm;
            return GmresOutcome { iterations: total, residual: res, converged: res <= cfg.tol * 1.01 };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_dense_nonsymmetric_system() {
        let n = 30;
        let a: Vec<Complex64> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                let diag = if i == j { Complex64::new(4.0, 1.0) } else { Complex64::new(0.0, 0.0) };
                diag + Complex64::new(((i * 3 + j * 7) % 11) as f64 / 40.0, ((i + 2 * j) % 5) as f64 / 50.0)
            })
            .collect();
        let xtrue: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64 * 0.1)).collect();
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                b[i] += a[i * n + j] * xtrue[j];
            }
        }
        let apply = |v: &[Complex64], out: &mut [Complex64]| {
            for i in 0..n {
                out[i] = (0..n).map(|j| a[i * n + j] * v[j]).sum();
            }
        };
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        let cfg = GmresConfig { tol: 1e-12, restart: 8, max_iter: 500 };
        let out = gmres(apply, &b, &mut x, &cfg);
        assert!(out.converged, "{out:?}");
        for (xi, ti) in x.iter().zip(&xtrue) {
            assert!((xi - ti).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let mut x = vec![Complex64::new(1.0, 1.0); 4];
        let b = vec![Complex64::new(0.0, 0.0); 4];
        let out = gmres(|v, o| o.copy_from_slice(v), &b, &mut x, &GmresConfig::default());
        assert!(out.converged);
        assert!(x.iter().all(|v| v.norm() == 0.0));
    }
}
