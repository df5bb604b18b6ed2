use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tail bits of the two terminated constituent encoders.
pub const TAIL_BITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CodeRate {
    /// Unpunctured mother code.
    Third,
    Half,
    EightNinths,
}

impl CodeRate {
    /// Whether parity bit `k` of constituent `stream` (0 or 1) survives.
    ///
    /// * 1/2: first parity on even `k`, second on odd `k`.
    /// * 8/9: first parity at `k ≡ 0 (mod 16)`, second at `k ≡ 8 (mod 16)`,
    ///   i.e. one parity bit per eight information bits.
    #[inline]
    pub fn keeps_parity(self, stream: usize, k: usize) -> bool {
        match (self, stream) {
            (CodeRate::Third, _) => true,
            (CodeRate::Half, 0) => k % 2 == 0,
            (CodeRate::Half, _) => k % 2 == 1,
            (CodeRate::EightNinths, 0) => k % 16 == 0,
            (CodeRate::EightNinths, _) => k % 16 == 8,
        }
    }

    /// Default information block length used with this rate.
    pub fn default_block_len(self) -> usize {
        match self {
            CodeRate::Third | CodeRate::Half => 594,
            CodeRate::EightNinths => 1056,
        }
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodeRate::Third => "1/3",
            CodeRate::Half => "1/2",
            CodeRate::EightNinths => "8/9",
        })
    }
}

impl FromStr for CodeRate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1/3" => Ok(CodeRate::Third),
            "1/2" => Ok(CodeRate::Half),
            "8/9" => Ok(CodeRate::EightNinths),
            other => invalid(format!("unsupported code rate '{other}' (1/2, 8/9 or 1/3)")),
        }
    }
}

impl TryFrom<String> for CodeRate {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CodeRate> for String {
    fn from(r: CodeRate) -> String {
        r.to_string()
    }
}

/// Mother codeword length: `(x_k, z_k, z'_k)` per information bit then the
/// two tails `(x, z) ×3`, `(x', z') ×3`.
pub fn mother_len(block_len: usize) -> usize {
    3 * block_len + TAIL_BITS
}

/// Length after puncturing, tails included.
pub fn punctured_len(block_len: usize, rate: CodeRate) -> usize {
    let parity: usize = (0..block_len)
        .map(|k| rate.keeps_parity(0, k) as usize + rate.keeps_parity(1, k) as usize)
        .sum();
    block_len + parity + TAIL_BITS
}

fn kept(block_len: usize, rate: CodeRate, i: usize) -> bool {
    if i >= 3 * block_len {
        return true;
    }
    match i % 3 {
        0 => true,
        j => rate.keeps_parity(j - 1, i / 3),
    }
}

pub fn puncture<T: Copy>(mother: &[T], block_len: usize, rate: CodeRate) -> Result<Vec<T>> {
    if mother.len() != mother_len(block_len) {
        return invalid(format!(
            "mother codeword has {} values, expected {}",
            mother.len(),
            mother_len(block_len)
        ));
    }
    Ok(mother
        .iter()
        .enumerate()
        .filter(|(i, _)| kept(block_len, rate, *i))
        .map(|(_, &v)| v)
        .collect())
}

/// Re-inserts zero LLRs at punctured positions.
pub fn depuncture(llrs: &[f64], block_len: usize, rate: CodeRate) -> Result<Vec<f64>> {
    if llrs.len() != punctured_len(block_len, rate) {
        return invalid(format!(
            "{} LLRs for a {}-bit punctured codeword",
            llrs.len(),
            punctured_len(block_len, rate)
        ));
    }
    let mut it = llrs.iter();
    Ok((0..mother_len(block_len))
        .map(|i| if kept(block_len, rate, i) { *it.next().expect("length checked") } else { 0.0 })
        .collect())
}
