//! Cyclic delay diversity in the frequency domain.
//!
//! A cyclic shift of `d` samples on antenna `i` is a phase ramp
//! `e^{-j2πkd/N}` on subcarrier `k`, so CDD and Alamouti+CDD reduce to
//! per-subcarrier effective channels seen by a single-stream or a 2-branch
//! Alamouti receiver.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::{delay_phase, Cplx};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CddConfig {
    pub n_fft: usize,
    /// Cyclic delay per transmit antenna, in samples.
    pub delays: Vec<usize>,
    /// Antennas carrying Alamouti stream 1 and stream 2 (zero-based).
    pub alamouti_pairs: [[usize; 2]; 2],
}

impl Default for CddConfig {
    fn default() -> Self {
        Self {
            n_fft: 512,
            delays: vec![0, 64, 128, 192],
            alamouti_pairs: [[0, 2], [1, 3]],
        }
    }
}

impl CddConfig {
    pub fn validate(&self, nt: usize) -> Result<()> {
        if self.delays.len() != nt {
            return invalid(format!("{} cyclic delays for {nt} antennas", self.delays.len()));
        }
        if let Some(d) = self.delays.iter().find(|&&d| d >= self.n_fft) {
            return invalid(format!("cyclic delay {d} outside 0..{}", self.n_fft));
        }
        let mut seen = [false; 4];
        for a in self.alamouti_pairs.iter().flatten() {
            if *a >= nt.min(4) || std::mem::replace(&mut seen[*a], true) {
                return invalid("Alamouti pairs must partition the four antennas");
            }
        }
        Ok(())
    }
}

/// `out[n] = x[(n - d) mod N]`.
pub fn cyclic_shift(x: &[Cplx], d: usize) -> Result<Vec<Cplx>> {
    let n = x.len();
    if d >= n {
        return invalid(format!("shift {d} outside 0..{n}"));
    }
    let mut out = x.to_vec();
    out.rotate_right(d);
    Ok(out)
}

/// `h_eff(k) = (1/√Nt) Σ_i H_k[i] e^{-j2πk d_i/N}` for one receive antenna.
pub fn cdd_effective(h_row: &[Cplx], k: usize, cfg: &CddConfig) -> Cplx {
    debug_assert!(k < cfg.n_fft);
    debug_assert_eq!(h_row.len(), cfg.delays.len());
    let s = 1.0 / (h_row.len() as f64).sqrt();
    h_row
        .iter()
        .zip(&cfg.delays)
        .map(|(&h, &d)| h * delay_phase(k, d, cfg.n_fft))
        .sum::<Cplx>()
        * s
}

/// Per-subcarrier Alamouti branch gains `(g1, g2)` for one receive antenna.
/// Each branch is a delayed pair of antennas; the two `1/√2` factors split
/// power between the Alamouti branches and between the pair members.
pub fn alamouti_cdd_effective(h_row: &[Cplx], k: usize, cfg: &CddConfig) -> (Cplx, Cplx) {
    debug_assert!(k < cfg.n_fft);
    let branch = |pair: [usize; 2]| -> Cplx {
        pair.iter()
            .map(|&a| h_row[a] * delay_phase(k, cfg.delays[a], cfg.n_fft))
            .sum::<Cplx>()
            * 0.5
    };
    (branch(cfg.alamouti_pairs[0]), branch(cfg.alamouti_pairs[1]))
}
