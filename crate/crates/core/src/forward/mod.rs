//! Simulated EIT measurements: trigonometric current patterns, the complete
//! electrode model, and relative Gaussian noise.

mod data;
mod fem;
mod phantom;
mod skyline;

pub use data::{read_simulated, write_simulated, SimulatedData};
pub use fem::{CemModel, CemSolution, CemSolver};
pub use phantom::{
    chest_prior_regions, chest_truth_regions, format_regions, parse_regions, Pathology, PhantomSpec, Region,
    TissueValues, CHEST_REFERENCE_PERIMETER,
};
pub use skyline::{reverse_cuthill_mckee, SkylineLdlt, SkylinePattern};

use crate::error::{invalid, Result};
use crate::geometry::{ElectrodeLayout, TriMesh};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

/// Applied electrode currents of pattern `index` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentFrame {
    pub index: usize,
    pub values: Vec<Complex64>,
}

/// Electrode voltages for pattern `index`, normalized to sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageFrame {
    pub index: usize,
    pub values: Vec<Complex64>,
}

/// Value of trigonometric pattern `j` on electrode `l` (both 1-based) with
/// `θ_l = 2πl/L`.
pub fn trig_value(l_count: usize, j: usize, l: usize) -> f64 {
    let theta = 2.0 * PI * l as f64 / l_count as f64;
    let half = l_count / 2;
    if j <= half {
        (j as f64 * theta).cos()
    } else {
        ((half as f64 - j as f64) * theta).sin()
    }
}

/// Continuum counterpart of pattern `j` on a boundary of length 2π:
/// `cos(js)/√π` or `sin((L/2 - j)s)/√π`, with its derivative in `s`.
pub fn trig_mode(l_count: usize, j: usize, s: f64) -> (f64, f64) {
    let half = l_count / 2;
    let norm = 1.0 / PI.sqrt();
    if j <= half {
        let a = j as f64;
        (norm * (a * s).cos(), -norm * a * (a * s).sin())
    } else {
        let a = half as f64 - j as f64;
        (norm * (a * s).sin(), norm * a * (a * s).cos())
    }
}

/// The `L - 1` trigonometric current patterns with amplitude `amplitude`.
pub fn trig_patterns(l_count: usize, amplitude: f64) -> Result<Vec<CurrentFrame>> {
    if l_count < 2 || l_count % 2 == 1 {
        return invalid(format!("electrode count must be even, got {l_count}"));
    }
    if !(amplitude > 0.0) {
        return invalid("pattern amplitude must be positive");
    }
    Ok((1..l_count)
        .map(|j| CurrentFrame {
            index: j,
            values: (1..=l_count).map(|l| Complex64::new(amplitude * trig_value(l_count, j, l), 0.0)).collect(),
        })
        .collect())
}

/// Adds relative Gaussian noise: `Re Ṽ = Re V + η·max|Re V|·N`, and the same
/// with the imaginary parts, where `N` is one standard normal vector per
/// pattern drawn from a ChaCha stream keyed by `(seed, pattern index)`.
pub fn add_noise(frames: &[VoltageFrame], eta: f64, seed: u64) -> Result<Vec<VoltageFrame>> {
    if !(eta >= 0.0) {
        return invalid(format!("noise level must be nonnegative, got {eta}"));
    }
    if eta == 0.0 {
        return Ok(frames.to_vec());
    }
    Ok(frames
        .iter()
        .map(|f| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(f.index as u64);
            let noise: Vec<f64> = (0..f.values.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let re_max = f.values.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
            let im_max = f.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
            let values = f
                .values
                .iter()
                .zip(&noise)
                .map(|(v, n)| Complex64::new(v.re + eta * re_max * n, v.im + eta * im_max * n))
                .collect();
            VoltageFrame { index: f.index, values }
        })
        .collect())
}

/// Convenience wrapper: one CEM solve with per-triangle admittivity.
pub fn solve_cem(
    mesh: &TriMesh,
    layout: &ElectrodeLayout,
    scale: f64,
    admittivity: &[Complex64],
    frame: &CurrentFrame,
) -> Result<VoltageFrame> {
    let model = CemModel::new(mesh, &layout.contact, scale)?;
    model.factorize(admittivity)?.solve(frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patterns_sum_to_zero_and_match_cosine() {
        let p = trig_patterns(32, 1.0).unwrap();
        assert_eq!(p.len(), 31);
        for l in 1..=32 {
            let want = (2.0 * PI * l as f64 / 32.0).cos();
            assert!((p[0].values[l - 1].re - want).abs() < 1e-15);
        }
        for f in &p {
            assert!(f.values.iter().sum::<Complex64>().norm() < 1e-12);
        }
        assert!(trig_patterns(5, 1.0).is_err());
    }

    #[test]
    fn four_electrode_patterns_are_orthogonal() {
        let p = trig_patterns(4, 1.0).unwrap();
        // cos θ, cos 2θ, sin(-θ) with θ = π/2·l
        let want = [[0.0, -1.0, 0.0, 1.0], [-1.0, 1.0, -1.0, 1.0], [-1.0, 0.0, 1.0, 0.0]];
        for (f, w) in p.iter().zip(&want) {
            for (v, x) in f.values.iter().zip(w) {
                assert!((v.re - x).abs() < 1e-15);
            }
        }
        for a in 0..3 {
            for b in 0..a {
                let dot: f64 = p[a].values.iter().zip(&p[b].values).map(|(x, y)| x.re * y.re).sum();
                assert!(dot.abs() < 1e-14);
            }
        }
    }

    fn frames() -> Vec<VoltageFrame> {
        (1..32)
            .map(|j| VoltageFrame {
                index: j,
                values: (0..32)
                    .map(|l| Complex64::new((l as f64 * 0.3 + j as f64).sin(), 0.2 * (l as f64).cos()))
                    .collect(),
            })
            .collect()
    }

    #[test]
    fn zero_noise_is_identity_and_seeded_noise_repeats() {
        let f = frames();
        assert_eq!(add_noise(&f, 0.0, 9).unwrap(), f);
        assert_eq!(add_noise(&f, 0.01, 9).unwrap(), add_noise(&f, 0.01, 9).unwrap());
        assert_ne!(add_noise(&f, 0.01, 9).unwrap(), add_noise(&f, 0.01, 10).unwrap());
        assert!(add_noise(&f, -0.1, 9).is_err());
    }

    #[test]
    fn noise_level_matches_eta() {
        let f = frames();
        let eta = 1e-3;
        let noisy = add_noise(&f, eta, 1).unwrap();
        let mut acc = 0.0;
        let mut n = 0.0;
        for (a, b) in f.iter().zip(&noisy) {
            let m = a.values.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
            for (x, y) in a.values.iter().zip(&b.values) {
                acc += ((y.re - x.re) / m).powi(2);
                n += 1.0;
            }
        }
        let std = (acc / n).sqrt();
        assert!((std / eta - 1.0).abs() < 0.3, "std {std}");
    }
}
