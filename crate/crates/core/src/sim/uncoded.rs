use rayon::prelude::*;

use super::link::{default_detector, Link, SYMBOLS_PER_UNIT};
use crate::cdd::CddConfig;
use crate::channel::noise_variance;
use crate::detect::DetectorKind;
use crate::error::{invalid, Result};
use crate::numerics::{CMat, Constellation, Cplx, Modulation, RngStream};
use crate::stbc::SchemeId;

/// Stream ids reserved for uncoded runs.
const UNCODED_STREAM_BASE: u64 = 1 << 56;
const UNITS_PER_CHUNK: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UncodedPoint {
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits: u64,
}

impl UncodedPoint {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits as f64
    }
}

/// Uncoded hard-decision BER with an independent `CN(0,1)` channel on every
/// resource unit (i.i.d. per-subcarrier Rayleigh fading).
pub fn uncoded_ber(
    scheme: SchemeId,
    modulation: Modulation,
    detector: Option<DetectorKind>,
    nr: usize,
    snr_db: f64,
    units: u64,
    seed: u64,
) -> Result<UncodedPoint> {
    if nr == 0 || units == 0 {
        return invalid("uncoded run needs nr > 0 and units > 0");
    }
    let cons = Constellation::new(modulation);
    let cdd = CddConfig::default();
    let link = Link {
        scheme,
        detector: detector.unwrap_or_else(|| default_detector(scheme)),
        cdd: &cdd,
        cons: &cons,
    };
    let n0 = noise_variance(snr_db);
    let bps = cons.bits_per_symbol();
    let chunks = units.div_ceil(UNITS_PER_CHUNK);
    let errors: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<u64> {
            let mut rng = RngStream::new(seed, UNCODED_STREAM_BASE + c).generator();
            let n = UNITS_PER_CHUNK.min(units - c * UNITS_PER_CHUNK);
            let mut e = 0;
            for u in 0..n {
                let bits = rng.bits(SYMBOLS_PER_UNIT * bps);
                let s = cons.map(&bits)?;
                let s: [Cplx; SYMBOLS_PER_UNIT] = std::array::from_fn(|i| s[i]);
                let mut h = CMat::zeros(nr, 4);
                for rx in 0..nr {
                    for tx in 0..4 {
                        h[(rx, tx)] = rng.gaussian_pair(1.0)?;
                    }
                }
                let k = (u as usize) % cdd.n_fft;
                let (d, _) = link.run_unit(&s, &h, k, n0, n0, &mut rng)?;
                let got = d.hard_symbols.iter().flat_map(|p| cons.bits_of(cons.nearest(*p)));
                e += got.zip(&bits).filter(|(a, b)| a != *b).count() as u64;
            }
            Ok(e)
        })
        .sum::<Result<u64>>()?;
    Ok(UncodedPoint {
        snr_db,
        bit_errors: errors,
        bits: units * (SYMBOLS_PER_UNIT * bps) as u64,
    })
}
