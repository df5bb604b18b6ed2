use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Cplx;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulation {
    #[default]
    #[serde(rename = "qpsk")]
    Qpsk,
    #[serde(rename = "16qam")]
    Qam16,
}

impl Modulation {
    pub fn order(self) -> usize {
        match self {
            Modulation::Qpsk => 4,
            Modulation::Qam16 => 16,
        }
    }

    pub fn bits_per_symbol(self) -> usize {
        self.order().trailing_zeros() as usize
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "16qam",
        })
    }
}

impl FromStr for Modulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Modulation::Qpsk),
            "16qam" | "qam16" => Ok(Modulation::Qam16),
            other => invalid(format!("unknown modulation '{other}'")),
        }
    }
}

/// Square Gray-labelled constellation built as the product of two Gray PAM
/// alphabets. The first half of a symbol's bits (MSB first) selects the
/// in-phase level, the second half the quadrature level.
///
/// QPSK: `(b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / √2`.
/// 16QAM per dimension: `00 -> +1`, `01 -> +3`, `10 -> -1`, `11 -> -3`,
/// scaled by `1/√10` (first bit is the sign, second the magnitude).
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    modulation: Modulation,
    pam_levels: Vec<f64>,
    pam_labels: Vec<u32>,
    points: Vec<Cplx>,
    labels: Vec<u32>,
}

impl Constellation {
    pub fn new(modulation: Modulation) -> Self {
        let (levels, labels): (Vec<f64>, Vec<u32>) = match modulation {
            Modulation::Qpsk => {
                let a = std::f64::consts::FRAC_1_SQRT_2;
                (vec![a, -a], vec![0, 1])
            }
            Modulation::Qam16 => {
                let a = 1.0 / 10f64.sqrt();
                (vec![3.0 * a, a, -a, -3.0 * a], vec![0b01, 0b00, 0b10, 0b11])
            }
        };
        Self::from_pam(modulation, levels, labels)
    }

    pub fn qpsk() -> Self {
        Self::new(Modulation::Qpsk)
    }

    pub fn qam16() -> Self {
        Self::new(Modulation::Qam16)
    }

    fn from_pam(modulation: Modulation, pam_levels: Vec<f64>, pam_labels: Vec<u32>) -> Self {
        let bpd = modulation.bits_per_symbol() / 2;
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for (&re, &lr) in pam_levels.iter().zip(&pam_labels) {
            for (&im, &li) in pam_levels.iter().zip(&pam_labels) {
                points.push(Cplx::new(re, im));
                labels.push((lr << bpd) | li);
            }
        }
        Self {
            modulation,
            pam_levels,
            pam_labels,
            points,
            labels,
        }
    }

    /// Same labelling with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_pam(
            self.modulation,
            self.pam_levels.iter().map(|v| v * factor).collect(),
            self.pam_labels.clone(),
        )
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.modulation.bits_per_symbol()
    }

    pub fn bits_per_dim(&self) -> usize {
        self.bits_per_symbol() / 2
    }

    pub fn points(&self) -> &[Cplx] {
        &self.points
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Per-dimension amplitude levels (`√M` of them).
    pub fn pam_levels(&self) -> &[f64] {
        &self.pam_levels
    }

    pub fn pam_labels(&self) -> &[u32] {
        &self.pam_labels
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order() as f64
    }

    /// Index of the point closest to `z`.
    pub fn nearest(&self, z: Cplx) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Bits of point `index`, MSB first.
    pub fn bits_of(&self, index: usize) -> impl Iterator<Item = u8> + '_ {
        let m = self.bits_per_symbol();
        let label = self.labels[index];
        (0..m).map(move |i| ((label >> (m - 1 - i)) & 1) as u8)
    }

    /// Maps a bit slice (length divisible by `log2 M`) to symbols.
    pub fn map(&self, bits: &[u8]) -> Result<Vec<Cplx>> {
        let m = self.bits_per_symbol();
        if !bits.len().is_multiple_of(m) {
            return invalid(format!(
                "{} bits is not a multiple of {m} bits per symbol",
                bits.len()
            ));
        }
        let bpd = self.bits_per_dim();
        let level = |chunk: &[u8]| -> Result<f64> {
            let mut label = 0u32;
            for &b in chunk {
                if b > 1 {
                    return invalid(format!("bit value {b}"));
                }
                label = (label << 1) | b as u32;
            }
            let pos = self.pam_labels.iter().position(|&l| l == label).expect("complete labelling");
            Ok(self.pam_levels[pos])
        };
        bits.chunks(m)
            .map(|c| Ok(Cplx::new(level(&c[..bpd])?, level(&c[bpd..])?)))
            .collect()
    }
}

/// Free-function form of [`Constellation::map`].
pub fn gray_map(bits: &[u8], constellation: &Constellation) -> Result<Vec<Cplx>> {
    constellation.map(bits)
}
