//! One resource unit: a subcarrier carrying four data symbols over four
//! OFDM-symbol slots, for any of the four schemes.

use crate::cdd::{alamouti_cdd_effective, cdd_effective, CddConfig};
use crate::detect::{
    alamouti_detect, cdd_detect, lmmse_detect, mdc_lmmse_detect, mdc_mld, qostbc_mld,
    DetectorKind, DetectorOutput,
};
use crate::error::Result;
use crate::numerics::{CMat, Constellation, Cplx, SimRng};
use crate::stbc::{
    alamouti_codeword, conjugation_pattern, encode, equiv_channel, stack_complex, transmit,
    SchemeId,
};

/// OFDM-symbol slots occupied by one unit, identical for every scheme.
pub const SLOTS_PER_UNIT: usize = 4;
pub const SYMBOLS_PER_UNIT: usize = 4;

/// Per-unit link: channel `h` is the raw `Nr × 4` frequency response on
/// subcarrier `k`.
#[derive(Clone, Debug)]
pub struct Link<'a> {
    pub scheme: SchemeId,
    pub detector: DetectorKind,
    pub cdd: &'a CddConfig,
    pub cons: &'a Constellation,
}

/// Detector used when none is requested: LMMSE for QO-STBC, ML otherwise.
pub fn default_detector(scheme: SchemeId) -> DetectorKind {
    match scheme {
        SchemeId::Qostbc => DetectorKind::Lmmse,
        _ => DetectorKind::Mld,
    }
}

impl Link<'_> {
    /// Transmits four symbols on subcarrier `k`, adds noise of variance
    /// `n0` per receive sample and returns the detector output along with
    /// the number of slots used. `n0_det` is the variance the detector
    /// assumes.
    pub fn run_unit(
        &self,
        symbols: &[Cplx; SYMBOLS_PER_UNIT],
        h: &CMat,
        k: usize,
        n0: f64,
        n0_det: f64,
        rng: &mut SimRng,
    ) -> Result<(DetectorOutput, usize)> {
        let nr = h.rows();
        let mode = self.detector.llr_mode();
        let noisy = |mut r: Vec<Cplx>, rng: &mut SimRng| -> Result<Vec<Cplx>> {
            if n0 > 0.0 {
                for v in &mut r {
                    *v += rng.gaussian_pair(n0)?;
                }
            }
            Ok(r)
        };
        match self.scheme {
            SchemeId::Cdd => {
                let heff: Vec<Cplx> = (0..nr).map(|rx| cdd_effective(h.row(rx), k, self.cdd)).collect();
                let mut out: Option<DetectorOutput> = None;
                for s in symbols {
                    let r = noisy(heff.iter().map(|g| g * s).collect(), rng)?;
                    let d = cdd_detect(&r, &heff, n0_det, self.cons, mode)?;
                    merge(&mut out, d);
                }
                Ok((out.expect("four symbols"), SLOTS_PER_UNIT))
            }
            SchemeId::AlamoutiCdd => {
                let g: Vec<(Cplx, Cplx)> =
                    (0..nr).map(|rx| alamouti_cdd_effective(h.row(rx), k, self.cdd)).collect();
                let gm = CMat::from_fn(nr, 2, |rx, b| if b == 0 { g[rx].0 } else { g[rx].1 });
                let mut out: Option<DetectorOutput> = None;
                for pair in symbols.chunks(2) {
                    let r = noisy(transmit(&alamouti_codeword(pair[0], pair[1]), &gm), rng)?;
                    let d = match self.detector {
                        DetectorKind::Lmmse => {
                            let eq = equiv_channel(SchemeId::AlamoutiCdd, &gm, n0_det)?;
                            let y = stack_complex(&r, nr, conjugation_pattern(SchemeId::AlamoutiCdd));
                            lmmse_detect(&y, &eq, self.cons, mode)?
                        }
                        _ => alamouti_detect(&r, &g, n0_det, self.cons, mode)?,
                    };
                    merge(&mut out, d);
                }
                Ok((out.expect("two codewords"), SLOTS_PER_UNIT))
            }
            SchemeId::Qostbc | SchemeId::MdcQostbc => {
                let heff = h.scale(Cplx::new(self.scheme.power_scale(), 0.0));
                let cw = encode(self.scheme, symbols)?;
                let r = noisy(transmit(&cw.entries, &heff), rng)?;
                let d = match (self.scheme, self.detector) {
                    (SchemeId::Qostbc, DetectorKind::Lmmse) => {
                        let eq = equiv_channel(SchemeId::Qostbc, &heff, n0_det)?;
                        let y = stack_complex(&r, nr, conjugation_pattern(SchemeId::Qostbc));
                        lmmse_detect(&y, &eq, self.cons, mode)?
                    }
                    (SchemeId::Qostbc, _) => qostbc_mld(&r, &heff, n0_det, self.cons, mode)?,
                    (_, DetectorKind::Lmmse) => mdc_lmmse_detect(&r, &heff, n0_det, self.cons, mode)?,
                    _ => mdc_mld(&r, &heff, n0_det, self.cons, mode)?,
                };
                Ok((d, cw.slots()))
            }
        }
    }
}

fn merge(acc: &mut Option<DetectorOutput>, d: DetectorOutput) {
    match acc {
        None => *acc = Some(d),
        Some(a) => {
            a.hard_symbols.extend(d.hard_symbols);
            a.llrs.extend(d.llrs);
            a.hypotheses_evaluated += d.hypotheses_evaluated;
        }
    }
}
