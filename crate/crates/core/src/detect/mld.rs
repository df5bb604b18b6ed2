use super::soft::{bit_llrs, LlrMode};
use super::DetectorOutput;
use crate::error::{invalid, Result};
use crate::numerics::{CMat, Constellation, Cplx, RMat};
use crate::stbc::{equiv_channel, matched_whiten, stack_complex, stack_real, GroupSystem, SchemeId};

#[derive(Clone, Debug, PartialEq)]
pub struct GroupDecision {
    /// `(c_R, c_I)` of the most likely point.
    pub hard: [f64; 2],
    pub llrs: Vec<f64>,
    pub hypotheses: usize,
}

/// ML search over the `M` points of one whitened 2-real-dimensional group.
/// The likelihood of point `p` is `exp(−‖y − H p‖²/2)`.
pub fn mld_group(sys: &GroupSystem, c: &Constellation, mode: LlrMode) -> GroupDecision {
    let ll: Vec<f64> = c
        .points()
        .iter()
        .map(|p| -0.5 * sys.distance([p.re, p.im]))
        .collect();
    let best = ll
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
        .0;
    let mut llrs = Vec::with_capacity(c.bits_per_symbol());
    bit_llrs(&ll, c.labels(), c.bits_per_symbol(), mode, &mut llrs);
    let p = c.points()[best];
    GroupDecision {
        hard: [p.re, p.im],
        llrs,
        hypotheses: ll.len(),
    }
}

/// MDC-QOSTBC detection: matched filter, per-group whitening, four
/// independent `M`-point searches.
///
/// `r` holds the `4·Nr` received samples slot-major, `h` the `Nr × 4`
/// effective channel.
pub fn mdc_mld(
    r: &[Cplx],
    h: &CMat,
    n0: f64,
    c: &Constellation,
    mode: LlrMode,
) -> Result<DetectorOutput> {
    let eq = equiv_channel(SchemeId::MdcQostbc, h, n0)?;
    let groups = matched_whiten(&eq, &stack_real(r))?;
    let mut out = DetectorOutput {
        hard_symbols: Vec::with_capacity(4),
        llrs: Vec::with_capacity(4 * c.bits_per_symbol()),
        search_space: c.order(),
        hypotheses_evaluated: 0,
    };
    for g in &groups {
        let d = mld_group(g, c, mode);
        out.hard_symbols.push(Cplx::new(d.hard[0], d.hard[1]));
        out.llrs.extend(d.llrs);
        out.hypotheses_evaluated += d.hypotheses;
    }
    Ok(out)
}

/// Exhaustive ML over all `M⁴` symbol vectors for a real linear model
/// `r = G c + n` with `G` having 8 columns `c1R, c1I, …, c4I`.
/// Returns the decision and the number of hypotheses evaluated.
pub fn joint_mld_real(g: &RMat, r: &[f64], c: &Constellation) -> Result<([Cplx; 4], usize)> {
    if g.cols() != 8 || g.rows() != r.len() {
        return invalid(format!(
            "joint MLD needs an 8-column channel matching r ({}×{} vs {})",
            g.rows(),
            g.cols(),
            r.len()
        ));
    }
    // ‖r − Gc‖² = const − 2 cᵀz + cᵀKc
    let z = g.adjoint_mul_vec(r);
    let k = g.gram();
    let pts = c.points();
    let m = pts.len();
    let coords: Vec<[f64; 2]> = pts.iter().map(|p| [p.re, p.im]).collect();
    let mut best = (f64::INFINITY, [0usize; 4]);
    let mut v = [0.0f64; 8];
    for i0 in 0..m {
        for i1 in 0..m {
            for i2 in 0..m {
                for i3 in 0..m {
                    let idx = [i0, i1, i2, i3];
                    for s in 0..4 {
                        v[2 * s] = coords[idx[s]][0];
                        v[2 * s + 1] = coords[idx[s]][1];
                    }
                    let mut metric = 0.0;
                    for a in 0..8 {
                        let mut kv = 0.0;
                        for b in 0..8 {
                            kv += k[(a, b)] * v[b];
                        }
                        metric += v[a] * (kv - 2.0 * z[a]);
                    }
                    if metric < best.0 {
                        best = (metric, idx);
                    }
                }
            }
        }
    }
    Ok((best.1.map(|i| pts[i]), m.pow(4)))
}

/// Joint ML oracle for one MDC-QOSTBC codeword. Hard decisions only.
pub fn mdc_joint_mld(r: &[Cplx], h: &CMat, c: &Constellation) -> Result<DetectorOutput> {
    let eq = equiv_channel(SchemeId::MdcQostbc, h, 0.0)?;
    let (sym, n) = joint_mld_real(eq.real().expect("real form"), &stack_real(r), c)?;
    Ok(DetectorOutput {
        hard_symbols: sym.to_vec(),
        llrs: Vec::new(),
        search_space: n,
        hypotheses_evaluated: n,
    })
}

/// QO-STBC detection: pairwise ML over the interfering pairs `{x1, x4}` and
/// `{x2, x3}`, `M²` hypotheses each.
pub fn qostbc_mld(
    r: &[Cplx],
    h: &CMat,
    n0: f64,
    c: &Constellation,
    mode: LlrMode,
) -> Result<DetectorOutput> {
    let eq = equiv_channel(SchemeId::Qostbc, h, n0)?;
    let g = eq.complex().expect("complex form");
    if r.len() != g.rows() {
        return invalid(format!("received {} samples, expected {}", r.len(), g.rows()));
    }
    let y = stack_complex(r, h.rows(), crate::stbc::conjugation_pattern(SchemeId::Qostbc));
    let z = g.adjoint_mul_vec(&y);
    let k = g.gram();
    let scale = if n0 > 0.0 { 1.0 / n0 } else { 1.0 };
    let pts = c.points();
    let m = pts.len();
    let nb = c.bits_per_symbol();
    let labels: Vec<u32> = (0..m * m)
        .map(|i| (c.labels()[i / m] << nb) | c.labels()[i % m])
        .collect();
    let mut hard = [Cplx::new(0.0, 0.0); 4];
    let mut llr = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for (a, b) in [(0usize, 3usize), (1, 2)] {
        let mut ll = Vec::with_capacity(m * m);
        for sa in pts {
            for sb in pts {
                // sᴴKs − 2Re(sᴴz) restricted to the pair
                let quad = sa.norm_sqr() * k[(a, a)].re
                    + sb.norm_sqr() * k[(b, b)].re
                    + 2.0 * (sa.conj() * k[(a, b)] * sb).re;
                let lin = 2.0 * (sa.conj() * z[a] + sb.conj() * z[b]).re;
                ll.push(-(quad - lin) * scale);
            }
        }
        let best = ll
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
            .0;
        hard[a] = pts[best / m];
        hard[b] = pts[best % m];
        let mut pair = Vec::with_capacity(2 * nb);
        bit_llrs(&ll, &labels, 2 * nb, mode, &mut pair);
        llr[b] = pair.split_off(nb);
        llr[a] = pair;
    }
    Ok(DetectorOutput {
        hard_symbols: hard.to_vec(),
        llrs: llr.concat(),
        search_space: m * m,
        hypotheses_evaluated: 2 * m * m,
    })
}
