//! Exponential integral of complex argument.

use num_complex::Complex64;

pub(crate) const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Principal-branch exponential integral `E1(w) = ∫_w^∞ e^{-t}/t dt`.
///
/// The cut runs along the negative real axis. `Re E1` is continuous across
/// it; only the imaginary part jumps by `2π`.
pub fn exp_integral_e1(w: Complex64) -> Complex64 {
    assert!(w.norm_sqr() > 0.0, "E1 is singular at the origin");
    let r = w.norm();
    if r < 2.0 || (w.re < 0.0 && w.im.abs() < 0.6 * r + 2.0) {
        e1_series(w)
    } else {
        e1_continued_fraction(w)
    }
}

fn e1_series(w: Complex64) -> Complex64 {
    // E1(w) = -γ - ln w - Σ_{n≥1} (-w)^n / (n · n!)
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 1..500 {
        let nf = n as f64;
        term *= -w / nf;
        let add = term / nf;
        sum += add;
        if add.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    -EULER_GAMMA - w.ln() - sum
}

fn e1_continued_fraction(w: Complex64) -> Complex64 {
    // Modified Lentz on E1(w) = e^{-w} / (w + 1 - 1/(w + 3 - 4/(w + 5 - ...)))
    let tiny = 1e-300;
    let one = Complex64::new(1.0, 0.0);
    let mut b = w + 1.0;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = one / b;
    let mut h = d;
    for i in 1..5000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = one / (d * an + b);
        c = b + c.inv() * an;
        let del = c * d;
        h *= del;
        if (del - one).norm() < 1e-16 {
            break;
        }
    }
    h * (-w).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun tables / mpmath
        let cases = [
            (c(1.0, 0.0), c(0.219_383_934_395_520_3, 0.0)),
            (c(0.1, 0.0), c(1.822_923_958_419_390_7, 0.0)),
            (c(5.0, 0.0), c(0.001_148_295_591_275_325_6, 0.0)),
            (c(0.0, 1.0), c(-0.337_403_922_900_968_1, -0.624_713_256_427_713_6)),
            (c(-1.0, 1e-30), c(-1.895_117_816_355_936_8, -std::f64::consts::PI)),
        ];
        for (w, want) in cases {
            let got = exp_integral_e1(w);
            assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0), "E1({w}) = {got}, want {want}");
        }
    }

    #[test]
    fn branches_agree_across_switch() {
        // both expansions are valid in an overlap band; compare there
        for &(re, im) in &[(2.5, 0.5), (1.5, 2.0), (-0.5, 3.0), (0.5, -4.0), (-2.0, 4.5), (3.0, -3.0)] {
            let w = c(re, im);
            let s = e1_series(w);
            let f = e1_continued_fraction(w);
            assert!((s - f).norm() < 1e-11 * s.norm(), "{w}: {s} vs {f}");
        }
    }

    #[test]
    fn real_part_continuous_across_cut() {
        let above = exp_integral_e1(c(-3.0, 1e-12));
        let below = exp_integral_e1(c(-3.0, -1e-12));
        assert!((above.re - below.re).abs() < 1e-9);
        assert!(((above.im - below.im).abs() - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    }
}
