//! Space-time codewords for the four schemes and their linearised
//! equivalent channels.
//!
//! Codeword matrices are `T × Nt` (rows are time slots, columns antennas) and
//! are stored *unscaled*; `power_scale` is the per-antenna amplitude that
//! brings the per-channel-use transmit power to one. Receivers take channel
//! gains that already include that scale.

mod equiv;
mod whiten;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{CMat, Cplx, Scalar};

pub use equiv::{
    conjugation_pattern, equiv_channel, mdc_x_domain_channel, stack_complex, stack_real, transmit, EquivChannel,
    EquivForm,
};
pub use whiten::{matched_whiten, GroupSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeId {
    #[serde(rename = "cdd")]
    Cdd,
    #[serde(rename = "alamouti-cdd")]
    AlamoutiCdd,
    #[serde(rename = "qostbc")]
    Qostbc,
    #[serde(rename = "mdc-qostbc")]
    MdcQostbc,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [
        SchemeId::Cdd,
        SchemeId::AlamoutiCdd,
        SchemeId::Qostbc,
        SchemeId::MdcQostbc,
    ];

    /// Complex symbols carried by one codeword.
    pub fn symbols_per_codeword(self) -> usize {
        match self {
            SchemeId::Cdd => 1,
            SchemeId::AlamoutiCdd => 2,
            SchemeId::Qostbc | SchemeId::MdcQostbc => 4,
        }
    }

    /// Time slots spanned by one codeword.
    pub fn slots_per_codeword(self) -> usize {
        self.symbols_per_codeword()
    }

    /// Antenna columns of the codeword matrix (Alamouti+CDD is a 2-branch
    /// code spread over four antennas by the delay pairs).
    pub fn codeword_antennas(self) -> usize {
        match self {
            SchemeId::AlamoutiCdd => 2,
            _ => 4,
        }
    }

    pub fn power_scale(self) -> f64 {
        1.0 / (self.codeword_antennas() as f64).sqrt()
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeId::Cdd => "cdd",
            SchemeId::AlamoutiCdd => "alamouti-cdd",
            SchemeId::Qostbc => "qostbc",
            SchemeId::MdcQostbc => "mdc-qostbc",
        })
    }
}

impl FromStr for SchemeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "cdd" => Ok(SchemeId::Cdd),
            "alamouti-cdd" | "alamouti+cdd" => Ok(SchemeId::AlamoutiCdd),
            "qostbc" | "qo-stbc" => Ok(SchemeId::Qostbc),
            "mdc-qostbc" | "mdc" => Ok(SchemeId::MdcQostbc),
            other => invalid(format!("unknown scheme '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Codeword {
    pub entries: CMat,
    pub power_scale: f64,
}

impl Codeword {
    pub fn slots(&self) -> usize {
        self.entries.rows()
    }

    pub fn antennas(&self) -> usize {
        self.entries.cols()
    }

    /// Entries as radiated, i.e. multiplied by `power_scale`.
    pub fn transmitted(&self) -> CMat {
        self.entries.scale(Cplx::from_f64(self.power_scale))
    }
}

/// Real coordinates `[c1R, c1I, c2R, c2I, c3R, c3I, c4R, c4I]` of four
/// complex data symbols.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealSymbolVec(pub [f64; 8]);

impl RealSymbolVec {
    pub fn from_symbols(c: &[Cplx; 4]) -> Self {
        let mut v = [0.0; 8];
        for (i, s) in c.iter().enumerate() {
            v[2 * i] = s.re;
            v[2 * i + 1] = s.im;
        }
        Self(v)
    }

    pub fn to_symbols(&self) -> [Cplx; 4] {
        std::array::from_fn(|i| Cplx::new(self.0[2 * i], self.0[2 * i + 1]))
    }
}

/// Spreads the real coordinates of four data symbols over the four MDC
/// transmit symbols: `x1 = c1R + j c3R`, `x2 = c2R + j c4R`,
/// `x3 = -c1I + j c3I`, `x4 = -c2I + j c4I`.
pub fn mdc_symbol_map(c: &[Cplx; 4]) -> [Cplx; 4] {
    [
        Cplx::new(c[0].re, c[2].re),
        Cplx::new(c[1].re, c[3].re),
        Cplx::new(-c[0].im, c[2].im),
        Cplx::new(-c[1].im, c[3].im),
    ]
}

/// Inverse of [`mdc_symbol_map`].
pub fn mdc_symbol_unmap(x: &[Cplx; 4]) -> [Cplx; 4] {
    [
        Cplx::new(x[0].re, -x[2].re),
        Cplx::new(x[1].re, -x[3].re),
        Cplx::new(x[0].im, x[2].im),
        Cplx::new(x[1].im, x[3].im),
    ]
}

/// MDC-QOSTBC matrix in transmit-symbol form:
/// ```text
/// [  x1   x2   x3   x4 ]
/// [ -x2*  x1* -x4*  x3*]
/// [  x3   x4   x1   x2 ]
/// [ -x4*  x3* -x2*  x1*]
/// ```
pub fn mdc_codeword_from_x(x: &[Cplx; 4]) -> CMat {
    let [x1, x2, x3, x4] = *x;
    CMat::from_rows(&[
        [x1, x2, x3, x4],
        [-x2.conj(), x1.conj(), -x4.conj(), x3.conj()],
        [x3, x4, x1, x2],
        [-x4.conj(), x3.conj(), -x2.conj(), x1.conj()],
    ])
}

/// The same MDC-QOSTBC matrix written directly in the real coordinates.
/// Row 1 is the spatial-multiplexing sub-code, rows 1–2 form DSTTD.
pub fn mdc_codeword_from_reals(c: &RealSymbolVec) -> CMat {
    let [c1r, c1i, c2r, c2i, c3r, c3i, c4r, c4i] = c.0;
    let z = Cplx::new;
    CMat::from_rows(&[
        [z(c1r, c3r), z(c2r, c4r), z(-c1i, c3i), z(-c2i, c4i)],
        [z(-c2r, c4r), z(c1r, -c3r), z(c2i, c4i), z(-c1i, -c3i)],
        [z(-c1i, c3i), z(-c2i, c4i), z(c1r, c3r), z(c2r, c4r)],
        [z(c2i, c4i), z(-c1i, -c3i), z(-c2r, c4r), z(c1r, -c3r)],
    ])
}

/// Jafarkhani ABBA quasi-orthogonal code; symbol pairs {1,4} and {2,3}
/// interfere, all other pairs are orthogonal.
pub fn qostbc_codeword(x: &[Cplx; 4]) -> CMat {
    let [x1, x2, x3, x4] = *x;
    CMat::from_rows(&[
        [x1, x2, x3, x4],
        [-x2.conj(), x1.conj(), -x4.conj(), x3.conj()],
        [-x3.conj(), -x4.conj(), x1.conj(), x2.conj()],
        [x4, -x3, -x2, x1],
    ])
}

pub fn alamouti_codeword(s1: Cplx, s2: Cplx) -> CMat {
    CMat::from_rows(&[[s1, s2], [-s2.conj(), s1.conj()]])
}

/// Builds the codeword for `scheme`. CDD takes any number of symbols, one
/// per slot, radiated identically on all four antennas (the cyclic delays
/// are applied on the channel side).
pub fn encode(scheme: SchemeId, symbols: &[Cplx]) -> Result<Codeword> {
    let entries = match scheme {
        SchemeId::Cdd => {
            if symbols.is_empty() {
                return invalid("CDD needs at least one symbol");
            }
            CMat::from_fn(symbols.len(), 4, |t, _| symbols[t])
        }
        SchemeId::AlamoutiCdd => {
            let [s1, s2] = exact::<2>(scheme, symbols)?;
            alamouti_codeword(s1, s2)
        }
        SchemeId::Qostbc => qostbc_codeword(&exact::<4>(scheme, symbols)?),
        SchemeId::MdcQostbc => mdc_codeword_from_x(&mdc_symbol_map(&exact::<4>(scheme, symbols)?)),
    };
    Ok(Codeword {
        entries,
        power_scale: scheme.power_scale(),
    })
}

fn exact<const N: usize>(scheme: SchemeId, symbols: &[Cplx]) -> Result<[Cplx; N]> {
    symbols.try_into().or_else(|_| {
        invalid(format!(
            "{scheme} codeword takes {N} symbols, got {}",
            symbols.len()
        ))
    })
}
