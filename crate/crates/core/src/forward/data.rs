//! Text format for simulated current/voltage frames.
//!
//! ```text
//! # dbar-eit simulated data
//! electrodes 32
//! patterns 31
//! amplitude 1
//! eta 0.001
//! seed 7
//! provenance phantom=… mesh=…
//! frame 1
//! 1 I_re I_im V_re V_im
//! …
//! ```
//! Floats use the shortest representation that parses back to the same bits.

use super::{CurrentFrame, VoltageFrame};
use crate::error::{parse_err, Result};
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    pub amplitude: f64,
    pub eta: f64,
    pub seed: u64,
    pub provenance: String,
    pub currents: Vec<CurrentFrame>,
    pub voltages: Vec<VoltageFrame>,
}

impl SimulatedData {
    pub fn electrode_count(&self) -> usize {
        self.currents.first().map_or(0, |f| f.values.len())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# dbar-eit simulated data\n");
        writeln!(s, "electrodes {}", self.electrode_count()).unwrap();
        writeln!(s, "patterns {}", self.currents.len()).unwrap();
        writeln!(s, "amplitude {}", self.amplitude).unwrap();
        writeln!(s, "eta {}", self.eta).unwrap();
        writeln!(s, "seed {}", self.seed).unwrap();
        writeln!(s, "provenance {}", self.provenance).unwrap();
        for (c, v) in self.currents.iter().zip(&self.voltages) {
            writeln!(s, "frame {}", c.index).unwrap();
            for (l, (i, u)) in c.values.iter().zip(&v.values).enumerate() {
                writeln!(s, "{} {} {} {} {}", l + 1, i.re, i.im, u.re, u.im).unwrap();
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines =
            text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<String> {
            let (no, line) = lines.next().ok_or_else(|| parse_err("simulated data", format!("missing `{key}`")))?;
            let rest = line
                .strip_prefix(key)
                .filter(|r| r.is_empty() || r.starts_with(' '))
                .ok_or_else(|| parse_err(format!("simulated data line {}", no + 1), format!("expected `{key}`")))?;
            Ok(rest.trim().to_string())
        }
        let num = |key: &str, v: String| -> Result<f64> {
            v.parse().map_err(|_| parse_err("simulated data", format!("bad `{key}` value `{v}`")))
        };
        let l = num("electrodes", header(&mut lines, "electrodes")?)? as usize;
        let patterns = num("patterns", header(&mut lines, "patterns")?)? as usize;
        let amplitude = num("amplitude", header(&mut lines, "amplitude")?)?;
        let eta = num("eta", header(&mut lines, "eta")?)?;
        let seed_text = header(&mut lines, "seed")?;
        let seed = seed_text.parse().map_err(|_| parse_err("simulated data", "bad seed"))?;
        let provenance = header(&mut lines, "provenance")?;
        let mut currents = Vec::with_capacity(patterns);
        let mut voltages = Vec::with_capacity(patterns);
        for _ in 0..patterns {
            let idx_text = header(&mut lines, "frame")?;
            let index: usize = idx_text.parse().map_err(|_| parse_err("simulated data", "bad frame index"))?;
            let mut cv = Vec::with_capacity(l);
            let mut vv = Vec::with_capacity(l);
            for _ in 0..l {
                let (no, line) = lines.next().ok_or_else(|| parse_err("simulated data", "truncated frame"))?;
                let f: Vec<f64> = line
                    .split_whitespace()
                    .skip(1)
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| parse_err(format!("simulated data line {}", no + 1), "bad number"))?;
                if f.len() != 4 {
                    return Err(parse_err(format!("simulated data line {}", no + 1), "expected 5 fields"));
                }
                cv.push(Complex64::new(f[0], f[1]));
                vv.push(Complex64::new(f[2], f[3]));
            }
            currents.push(CurrentFrame { index, values: cv });
            voltages.push(VoltageFrame { index, values: vv });
        }
        Ok(Self { amplitude, eta, seed, provenance, currents, voltages })
    }
}

pub fn write_simulated(data: &SimulatedData, path: &Path) -> Result<()> {
    std::fs::write(path, data.to_text())?;
    Ok(())
}

pub fn read_simulated(path: &Path) -> Result<SimulatedData> {
    SimulatedData::parse(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_is_bitwise(vals in proptest::collection::vec(-1e3f64..1e3, 16), eta in 0.0f64..0.1, seed in any::<u64>()) {
            let c = |k: usize| Complex64::new(vals[k % 16], vals[(k * 7 + 3) % 16] / 3.0);
            let data = SimulatedData {
                amplitude: 1.0,
                eta,
                seed,
                provenance: "phantom=abc mesh=def".into(),
                currents: (1..4).map(|j| CurrentFrame { index: j, values: (0..4).map(|l| c(l + j)).collect() }).collect(),
                voltages: (1..4).map(|j| VoltageFrame { index: j, values: (0..4).map(|l| c(l * j + 5) * 1e-7).collect() }).collect(),
            };
            prop_assert_eq!(SimulatedData::parse(&data.to_text()).unwrap(), data);
        }
    }
}
