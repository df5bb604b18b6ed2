use super::soft::LlrMode;
use super::{demap_coordinates, DetectorOutput};
use crate::error::{invalid, Error, Result};
use crate::numerics::{CMat, Constellation, Cplx};
use crate::stbc::{conjugation_pattern, mdc_x_domain_channel, stack_complex, EquivChannel, SchemeId};

fn isqrt_order(c: &Constellation) -> usize {
    1 << c.bits_per_dim()
}

/// Maximum-ratio combining of one symbol received on `Nr` antennas through
/// scalar effective gains. A zero channel gives all-zero LLRs.
pub fn cdd_detect(
    r: &[Cplx],
    h: &[Cplx],
    n0: f64,
    c: &Constellation,
    mode: LlrMode,
) -> Result<DetectorOutput> {
    if r.len() != h.len() || r.is_empty() {
        return invalid(format!("{} samples for {} channel gains", r.len(), h.len()));
    }
    let gamma: f64 = h.iter().map(|g| g.norm_sqr()).sum();
    let (z, var) = if gamma > 0.0 {
        let s: Cplx = h.iter().zip(r).map(|(g, y)| g.conj() * y).sum();
        (s / gamma, n0 / (2.0 * gamma))
    } else {
        (Cplx::new(0.0, 0.0), f64::INFINITY)
    };
    let (hard, llrs) = demap_coordinates(&[[(z.re, var), (z.im, var)]], c, mode);
    Ok(DetectorOutput {
        hard_symbols: hard,
        llrs,
        search_space: isqrt_order(c),
        hypotheses_evaluated: 2 * isqrt_order(c),
    })
}

/// Alamouti combining over two slots. `r` is `2·Nr` samples slot-major and
/// `g[rx]` the two branch gains seen by receive antenna `rx`.
pub fn alamouti_detect(
    r: &[Cplx],
    g: &[(Cplx, Cplx)],
    n0: f64,
    c: &Constellation,
    mode: LlrMode,
) -> Result<DetectorOutput> {
    let nr = g.len();
    if r.len() != 2 * nr || nr == 0 {
        return invalid(format!("Alamouti needs 2·{nr} samples, got {}", r.len()));
    }
    let mut s1 = Cplx::new(0.0, 0.0);
    let mut s2 = Cplx::new(0.0, 0.0);
    let mut gamma = 0.0;
    for (rx, &(g1, g2)) in g.iter().enumerate() {
        let (r1, r2) = (r[rx], r[nr + rx]);
        s1 += g1.conj() * r1 + g2 * r2.conj();
        s2 += g2.conj() * r1 - g1 * r2.conj();
        gamma += g1.norm_sqr() + g2.norm_sqr();
    }
    if gamma <= 0.0 {
        return Err(Error::DegenerateChannel("Alamouti channel is zero".into()));
    }
    let var = n0 / (2.0 * gamma);
    let (z1, z2) = (s1 / gamma, s2 / gamma);
    let (hard, llrs) =
        demap_coordinates(&[[(z1.re, var), (z1.im, var)], [(z2.re, var), (z2.im, var)]], c, mode);
    Ok(DetectorOutput {
        hard_symbols: hard,
        llrs,
        search_space: isqrt_order(c),
        hypotheses_evaluated: 4 * isqrt_order(c),
    })
}

/// Per-stream LMMSE output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoftSymbol {
    /// `W r` before bias removal.
    pub biased: Cplx,
    /// `(W G)_ii`.
    pub gain: f64,
    /// `biased / gain`.
    pub estimate: Cplx,
    /// Residual interference-plus-noise variance of `estimate`, `1/SINR`.
    pub variance: f64,
}

impl SoftSymbol {
    pub fn sinr(&self) -> f64 {
        1.0 / self.variance
    }
}

/// `W = (GᴴG + N0 I)⁻¹ Gᴴ` applied to `y`. With `N0 = 0` this is zero
/// forcing and a rank-deficient `G` is an error.
pub fn lmmse_equalize(y: &[Cplx], g: &CMat, n0: f64) -> Result<Vec<SoftSymbol>> {
    if y.len() != g.rows() {
        return invalid(format!("{} observations for a {}-row channel", y.len(), g.rows()));
    }
    if !(n0 >= 0.0) {
        return invalid(format!("noise variance {n0} is negative"));
    }
    let n = g.cols();
    let a = g.gram().add(&CMat::identity(n).scale(Cplx::new(n0, 0.0)));
    let ainv = a
        .inverse()
        .ok_or_else(|| Error::DegenerateChannel("LMMSE matrix is singular".into()))?;
    let xb = ainv.mul_vec(&g.adjoint_mul_vec(y));
    Ok((0..n)
        .map(|i| {
            // W G = I − N0 A⁻¹
            let gain = (1.0 - n0 * ainv[(i, i)].re).clamp(0.0, 1.0);
            if gain <= 0.0 {
                SoftSymbol {
                    biased: xb[i],
                    gain,
                    estimate: Cplx::new(0.0, 0.0),
                    variance: f64::INFINITY,
                }
            } else {
                SoftSymbol {
                    biased: xb[i],
                    gain,
                    estimate: xb[i] / gain,
                    variance: (1.0 - gain) / gain,
                }
            }
        })
        .collect())
}

/// LMMSE detection on a complex equivalent channel followed by per-dimension
/// soft demapping. `y` is the conjugation-stacked observation.
pub fn lmmse_detect(
    y: &[Cplx],
    eq: &EquivChannel,
    c: &Constellation,
    mode: LlrMode,
) -> Result<DetectorOutput> {
    let Some(g) = eq.complex() else {
        return invalid("LMMSE needs a complex equivalent channel");
    };
    let soft = lmmse_equalize(y, g, eq.noise_variance)?;
    let coords: Vec<_> = soft
        .iter()
        .map(|s| [(s.estimate.re, s.variance / 2.0), (s.estimate.im, s.variance / 2.0)])
        .collect();
    let (hard, llrs) = demap_coordinates(&coords, c, mode);
    Ok(DetectorOutput {
        hard_symbols: hard,
        llrs,
        search_space: isqrt_order(c),
        hypotheses_evaluated: 2 * coords.len() * isqrt_order(c),
    })
}

/// LMMSE for MDC-QOSTBC: equalise the transmitted `x`, then read each `c`
/// coordinate off the real or imaginary part it was placed in.
pub fn mdc_lmmse_detect(
    r: &[Cplx],
    h: &CMat,
    n0: f64,
    c: &Constellation,
    mode: LlrMode,
) -> Result<DetectorOutput> {
    let eq = mdc_x_domain_channel(h, n0)?;
    let y = stack_complex(r, h.rows(), conjugation_pattern(SchemeId::MdcQostbc));
    let x = lmmse_equalize(&y, eq.complex().expect("complex form"), n0)?;
    let re = |i: usize| (x[i].estimate.re, x[i].variance / 2.0);
    let im = |i: usize| (x[i].estimate.im, x[i].variance / 2.0);
    let neg = |(z, v): (f64, f64)| (-z, v);
    // x1 = c1R + j c3R, x2 = c2R + j c4R, x3 = −c1I + j c3I, x4 = −c2I + j c4I
    let coords = [
        [re(0), neg(re(2))],
        [re(1), neg(re(3))],
        [im(0), im(2)],
        [im(1), im(3)],
    ];
    let (hard, llrs) = demap_coordinates(&coords, c, mode);
    Ok(DetectorOutput {
        hard_symbols: hard,
        llrs,
        search_space: isqrt_order(c),
        hypotheses_evaluated: 8 * isqrt_order(c),
    })
}
