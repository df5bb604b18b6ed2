//! Rate-1/3 parallel concatenated turbo code with 8-state constituents
//! (feedback `1 + D² + D³`, feedforward `1 + D + D³`), punctured to 1/2 or
//! 8/9 and decoded with iterative Max-Log-MAP.

mod decoder;
mod interleaver;
mod puncture;
mod trellis;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use interleaver::Interleaver;
pub use puncture::{depuncture, mother_len, puncture, punctured_len, CodeRate, TAIL_BITS};
pub use trellis::Trellis;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurboConfig {
    pub block_len: usize,
    /// Octal, `D⁰` in the most significant bit.
    pub feedforward: u32,
    pub feedback: u32,
    pub iterations: usize,
    pub rate: CodeRate,
    pub interleaver_seed: u64,
}

impl TurboConfig {
    pub const FEEDFORWARD: u32 = 0o15;
    pub const FEEDBACK: u32 = 0o13;

    pub fn new(block_len: usize, rate: CodeRate) -> Self {
        Self {
            block_len,
            feedforward: Self::FEEDFORWARD,
            feedback: Self::FEEDBACK,
            iterations: 8,
            rate,
            interleaver_seed: 0,
        }
    }

    pub fn for_rate(rate: CodeRate) -> Self {
        Self::new(rate.default_block_len(), rate)
    }
}

/// Soft values, one per coded bit; positive favours bit 0.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrFrame(Vec<f64>);

impl LlrFrame {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("LLR {i} is not finite"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Encoder/decoder pair; immutable once built.
#[derive(Clone, Debug)]
pub struct TurboCodec {
    cfg: TurboConfig,
    trellis: Trellis,
    interleaver: Interleaver,
}

impl TurboCodec {
    pub fn new(cfg: TurboConfig) -> Result<Self> {
        if cfg.block_len == 0 {
            return invalid("turbo block length must be positive");
        }
        if cfg.iterations == 0 {
            return invalid("at least one turbo iteration is needed");
        }
        let trellis = Trellis::from_octal(cfg.feedback, cfg.feedforward)?;
        if trellis.memory() * 4 != TAIL_BITS {
            return invalid("tail layout assumes memory-3 constituents");
        }
        let interleaver = Interleaver::new(cfg.block_len, cfg.interleaver_seed);
        Ok(Self {
            cfg,
            trellis,
            interleaver,
        })
    }

    pub fn config(&self) -> &TurboConfig {
        &self.cfg
    }

    pub fn interleaver(&self) -> &Interleaver {
        &self.interleaver
    }

    pub fn coded_len(&self) -> usize {
        punctured_len(self.cfg.block_len, self.cfg.rate)
    }

    /// Unpunctured rate-1/3 codeword (see [`mother_len`] for the layout).
    pub fn encode_mother(&self, info: &[u8]) -> Result<Vec<u8>> {
        let k = self.cfg.block_len;
        if info.len() != k {
            return invalid(format!("expected {k} information bits, got {}", info.len()));
        }
        if info.iter().any(|&b| b > 1) {
            return invalid("information bits must be 0 or 1");
        }
        let (p1, t1) = self.trellis.encode(info);
        let (p2, t2) = self.trellis.encode(&self.interleaver.interleave(info));
        let mut out = Vec::with_capacity(mother_len(k));
        for i in 0..k {
            out.extend([info[i], p1[i], p2[i]]);
        }
        for (u, p) in t1.into_iter().chain(t2) {
            out.extend([u, p]);
        }
        Ok(out)
    }

    /// Systematic and parity streams, both encoders terminated, punctured
    /// to the configured rate.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        puncture(&self.encode_mother(info)?, self.cfg.block_len, self.cfg.rate)
    }

    pub fn decode(&self, llrs: &LlrFrame) -> Result<Vec<u8>> {
        let mother = depuncture(llrs.values(), self.cfg.block_len, self.cfg.rate)?;
        Ok(self.decode_mother(&mother))
    }

    /// Iterative decoding of a full-length (zero-filled) mother LLR vector.
    /// Returns hard decisions on the final a-posteriori LLRs.
    pub fn decode_mother(&self, mother: &[f64]) -> Vec<u8> {
        self.app_llrs(mother)
            .into_iter()
            .map(|l| (l < 0.0) as u8)
            .collect()
    }

    /// A-posteriori information-bit LLRs after the configured iterations.
    pub fn app_llrs(&self, mother: &[f64]) -> Vec<f64> {
        let k = self.cfg.block_len;
        let m = self.trellis.memory();
        assert_eq!(mother.len(), mother_len(k), "mother LLR length");
        let tail = &mother[3 * k..];

        let mut sys1: Vec<f64> = (0..k).map(|i| mother[3 * i]).collect();
        let mut par1: Vec<f64> = (0..k).map(|i| mother[3 * i + 1]).collect();
        let par2_info: Vec<f64> = (0..k).map(|i| mother[3 * i + 2]).collect();
        let mut sys2 = self.interleaver.interleave(&sys1);
        let mut par2 = par2_info;
        for j in 0..m {
            sys1.push(tail[2 * j]);
            par1.push(tail[2 * j + 1]);
            sys2.push(tail[2 * m + 2 * j]);
            par2.push(tail[2 * m + 2 * j + 1]);
        }

        let mut apriori1 = vec![0.0; k];
        let mut app2 = vec![0.0; k];
        for _ in 0..self.cfg.iterations {
            let app1 = decoder::max_log_map(&self.trellis, &sys1, &par1, &apriori1);
            let ext1: Vec<f64> = (0..k).map(|i| app1[i] - sys1[i] - apriori1[i]).collect();
            let apriori2 = self.interleaver.interleave(&ext1);
            app2 = decoder::max_log_map(&self.trellis, &sys2, &par2, &apriori2);
            let ext2: Vec<f64> = (0..k).map(|i| app2[i] - sys2[i] - apriori2[i]).collect();
            apriori1 = self.interleaver.deinterleave(&ext2);
        }
        self.interleaver.deinterleave(&app2)
    }
}
