//! Per-subcarrier detectors and soft demappers for the four schemes, plus
//! the exhaustive joint-ML oracles used to validate them.
//!
//! Every detector reports `search_space`, the number of hypotheses in each
//! independent search it performs: `M²` for a QO-STBC symbol pair, `M` for
//! an MDC-QOSTBC group, `√M` for a real dimension of an orthogonal code.

mod linear;
mod mld;
mod soft;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{Constellation, Cplx, Modulation};
use crate::stbc::SchemeId;

pub use linear::{
    alamouti_detect, cdd_detect, lmmse_detect, lmmse_equalize, mdc_lmmse_detect, SoftSymbol,
};
pub use mld::{joint_mld_real, mdc_joint_mld, mdc_mld, mld_group, qostbc_mld, GroupDecision};
pub use soft::{bit_llrs, pam_llrs, LlrMode, LLR_LIMIT};

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorOutput {
    pub hard_symbols: Vec<Cplx>,
    /// `log2 M` LLRs per symbol, symbol-major, MSB first.
    pub llrs: Vec<f64>,
    pub search_space: usize,
    pub hypotheses_evaluated: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorKind {
    #[serde(rename = "mld")]
    Mld,
    #[serde(rename = "lmmse")]
    Lmmse,
    #[serde(rename = "maxlog-mld")]
    MaxLogMld,
}

impl DetectorKind {
    pub fn llr_mode(self) -> LlrMode {
        match self {
            DetectorKind::MaxLogMld => LlrMode::MaxLog,
            _ => LlrMode::Exact,
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorKind::Mld => "mld",
            DetectorKind::Lmmse => "lmmse",
            DetectorKind::MaxLogMld => "maxlog-mld",
        })
    }
}

impl FromStr for DetectorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mld" => Ok(DetectorKind::Mld),
            "lmmse" => Ok(DetectorKind::Lmmse),
            "maxlog-mld" => Ok(DetectorKind::MaxLogMld),
            other => invalid(format!("unknown detector '{other}' (mld|lmmse|maxlog-mld)")),
        }
    }
}

/// Hypotheses per independent ML search for `scheme`: a symbol pair for
/// QO-STBC, one complex symbol for MDC-QOSTBC, one real dimension for the
/// orthogonal schemes.
pub fn search_space(scheme: SchemeId, modulation: Modulation) -> usize {
    let m = modulation.order();
    match scheme {
        SchemeId::Qostbc => m * m,
        SchemeId::MdcQostbc => m,
        SchemeId::Cdd | SchemeId::AlamoutiCdd => 1 << (modulation.bits_per_symbol() / 2),
    }
}

/// Demaps per-coordinate Gaussian observations `(z, var)` (one pair per
/// symbol: in-phase then quadrature) into LLRs and hard symbols.
pub(crate) fn demap_coordinates(
    coords: &[[(f64, f64); 2]],
    c: &Constellation,
    mode: LlrMode,
) -> (Vec<Cplx>, Vec<f64>) {
    let mut llrs = Vec::with_capacity(coords.len() * c.bits_per_symbol());
    let mut hard = Vec::with_capacity(coords.len());
    for [(zr, vr), (zi, vi)] in coords {
        pam_llrs(*zr, *vr, c, mode, &mut llrs);
        pam_llrs(*zi, *vi, c, mode, &mut llrs);
        let z = Cplx::new(
            if zr.is_finite() { *zr } else { 0.0 },
            if zi.is_finite() { *zi } else { 0.0 },
        );
        hard.push(c.points()[c.nearest(z)]);
    }
    (hard, llrs)
}

#[cfg(test)]
mod tests;
