use super::{mdc_codeword_from_reals, mdc_codeword_from_x, RealSymbolVec, SchemeId};
use crate::error::{invalid, Result};
use crate::numerics::{CMat, Cplx, RMat, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum EquivForm {
    /// Complex symbols; rows are the received samples of every slot, with
    /// conjugated slots conjugated.
    Complex(CMat),
    /// Real coordinates; rows alternate `Re`, `Im` of every received sample.
    Real(RMat),
}

/// Linearised channel `r = G s + n`. `noise_variance` is per complex sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivChannel {
    pub form: EquivForm,
    pub noise_variance: f64,
}

impl EquivChannel {
    pub fn complex(&self) -> Option<&CMat> {
        match &self.form {
            EquivForm::Complex(g) => Some(g),
            EquivForm::Real(_) => None,
        }
    }

    pub fn real(&self) -> Option<&RMat> {
        match &self.form {
            EquivForm::Real(g) => Some(g),
            EquivForm::Complex(_) => None,
        }
    }
}

/// Slots whose received samples are conjugated before stacking.
pub fn conjugation_pattern(scheme: SchemeId) -> &'static [bool] {
    match scheme {
        SchemeId::Cdd => &[false],
        SchemeId::AlamoutiCdd => &[false, true],
        SchemeId::Qostbc => &[false, true, true, false],
        SchemeId::MdcQostbc => &[false, true, false, true],
    }
}

/// Noiseless received samples, ordered slot-major: `r[t * nr + rx]`.
pub fn transmit(codeword: &CMat, h: &CMat) -> Vec<Cplx> {
    assert_eq!(codeword.cols(), h.cols(), "antenna count mismatch");
    let nr = h.rows();
    let mut r = Vec::with_capacity(codeword.rows() * nr);
    for t in 0..codeword.rows() {
        let row = codeword.row(t);
        for rx in 0..nr {
            r.push(row.iter().zip(h.row(rx)).map(|(&c, &g)| c * g).sum());
        }
    }
    r
}

pub fn stack_complex(r: &[Cplx], nr: usize, conjugate_slot: &[bool]) -> Vec<Cplx> {
    r.iter()
        .enumerate()
        .map(|(i, &v)| if conjugate_slot[i / nr] { v.conj() } else { v })
        .collect()
}

pub fn stack_real(r: &[Cplx]) -> Vec<f64> {
    r.iter().flat_map(|v| [v.re, v.im]).collect()
}

/// Equivalent channel of `scheme` for the effective gains `h` (`Nr × Nt`,
/// transmit power scaling already folded in).
///
/// * CDD: `h` is `Nr × 1` (the delay-combined gain); complex, one column.
/// * Alamouti: `Nr × 2`; complex, stack `(r1, r2*)`.
/// * QO-STBC: `Nr × 4`; complex, stack `(r1, r2*, r3*, r4)`.
/// * MDC-QOSTBC: `Nr × 4`; real with 8 columns ordered
///   `c1R, c1I, …, c4I`, rows `Re r, Im r` per sample.
pub fn equiv_channel(scheme: SchemeId, h: &CMat, noise_variance: f64) -> Result<EquivChannel> {
    let want = match scheme {
        SchemeId::Cdd => 1,
        s => s.codeword_antennas(),
    };
    if h.cols() != want || h.rows() == 0 {
        return invalid(format!(
            "{scheme} needs an Nr×{want} channel, got {}×{}",
            h.rows(),
            h.cols()
        ));
    }
    let nr = h.rows();
    let form = match scheme {
        SchemeId::Cdd => EquivForm::Complex(h.clone()),
        SchemeId::AlamoutiCdd => {
            let mut g = CMat::zeros(2 * nr, 2);
            for rx in 0..nr {
                let (h1, h2) = (h[(rx, 0)], h[(rx, 1)]);
                g[(rx, 0)] = h1;
                g[(rx, 1)] = h2;
                g[(nr + rx, 0)] = h2.conj();
                g[(nr + rx, 1)] = -h1.conj();
            }
            EquivForm::Complex(g)
        }
        SchemeId::Qostbc => {
            let mut g = CMat::zeros(4 * nr, 4);
            for rx in 0..nr {
                let [h1, h2, h3, h4]: [Cplx; 4] = std::array::from_fn(|n| h[(rx, n)]);
                let rows = [
                    [h1, h2, h3, h4],
                    [h2.conj(), -h1.conj(), h4.conj(), -h3.conj()],
                    [h3.conj(), h4.conj(), -h1.conj(), -h2.conj()],
                    [h4, -h3, -h2, h1],
                ];
                for (t, row) in rows.iter().enumerate() {
                    for (c, &v) in row.iter().enumerate() {
                        g[(t * nr + rx, c)] = v;
                    }
                }
            }
            EquivForm::Complex(g)
        }
        SchemeId::MdcQostbc => {
            // Linear dispersion: column u is the stacked response to the
            // u-th unit real coordinate.
            let mut g = RMat::zeros(8 * nr, 8);
            for u in 0..8 {
                let mut basis = [0.0; 8];
                basis[u] = 1.0;
                let r = transmit(&mdc_codeword_from_reals(&RealSymbolVec(basis)), h);
                for (i, v) in stack_real(&r).into_iter().enumerate() {
                    g[(i, u)] = v;
                }
            }
            EquivForm::Real(g)
        }
    };
    Ok(EquivChannel {
        form,
        noise_variance,
    })
}

/// Complex equivalent channel of MDC-QOSTBC over the transmit symbols
/// `x1..x4`, stacking `(r1, r2*, r3, r4*)`. Used by the linear receivers.
pub fn mdc_x_domain_channel(h: &CMat, noise_variance: f64) -> Result<EquivChannel> {
    if h.cols() != 4 || h.rows() == 0 {
        return invalid(format!("MDC-QOSTBC needs an Nr×4 channel, got {}×{}", h.rows(), h.cols()));
    }
    let nr = h.rows();
    let pattern = conjugation_pattern(SchemeId::MdcQostbc);
    let mut g = CMat::zeros(4 * nr, 4);
    for j in 0..4 {
        let mut x = [Cplx::from_f64(0.0); 4];
        x[j] = Cplx::from_f64(1.0);
        let col = stack_complex(&transmit(&mdc_codeword_from_x(&x), h), nr, pattern);
        for (i, v) in col.into_iter().enumerate() {
            g[(i, j)] = v;
        }
    }
    Ok(EquivChannel {
        form: EquivForm::Complex(g),
        noise_variance,
    })
}
