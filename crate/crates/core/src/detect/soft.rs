use serde::{Deserialize, Serialize};

use crate::numerics::Constellation;

/// Detector LLRs are clipped to this magnitude so they stay finite in the
/// noiseless limit.
pub const LLR_LIMIT: f64 = 500.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LlrMode {
    /// Log of summed likelihoods.
    #[default]
    Exact,
    /// Largest likelihood only.
    MaxLog,
}

fn combine(mode: LlrMode, vals: impl Iterator<Item = f64>) -> f64 {
    match mode {
        LlrMode::MaxLog => vals.fold(f64::NEG_INFINITY, f64::max),
        LlrMode::Exact => {
            let v: Vec<f64> = vals.collect();
            let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if m == f64::NEG_INFINITY {
                return m;
            }
            m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
        }
    }
}

/// Bit LLRs (`log P(b=0)/P(b=1)`, MSB first) from per-hypothesis
/// log-likelihoods under equal priors.
pub fn bit_llrs(loglik: &[f64], labels: &[u32], nbits: usize, mode: LlrMode, out: &mut Vec<f64>) {
    for i in 0..nbits {
        let shift = nbits - 1 - i;
        let zero = combine(
            mode,
            loglik.iter().zip(labels).filter(|(_, &l)| (l >> shift) & 1 == 0).map(|(&v, _)| v),
        );
        let one = combine(
            mode,
            loglik.iter().zip(labels).filter(|(_, &l)| (l >> shift) & 1 == 1).map(|(&v, _)| v),
        );
        let llr = zero - one;
        out.push(if llr.is_nan() { 0.0 } else { llr.clamp(-LLR_LIMIT, LLR_LIMIT) });
    }
}

/// LLRs of one real coordinate `z = a + n`, `n ~ N(0, var)`, `a` a PAM level.
/// Infinite variance (no information) yields zeros.
pub fn pam_llrs(z: f64, var: f64, c: &Constellation, mode: LlrMode, out: &mut Vec<f64>) {
    if !(var.is_finite()) || !z.is_finite() {
        out.extend(std::iter::repeat_n(0.0, c.bits_per_dim()));
        return;
    }
    let var = var.max(1e-300);
    let ll: Vec<f64> = c
        .pam_levels()
        .iter()
        .map(|a| -(z - a) * (z - a) / (2.0 * var))
        .collect();
    bit_llrs(&ll, c.pam_labels(), c.bits_per_dim(), mode, out);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qpsk_closed_form() {
        // LLR = 2·a·z/var for levels ±a
        let c = Constellation::qpsk();
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::new();
        pam_llrs(0.3, 0.2, &c, LlrMode::Exact, &mut out);
        assert!((out[0] - 2.0 * a * 0.3 / 0.2).abs() < 1e-12);
    }

    #[test]
    fn uninformative_inputs() {
        let c = Constellation::qam16();
        let mut out = Vec::new();
        pam_llrs(0.3, f64::INFINITY, &c, LlrMode::Exact, &mut out);
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn clipped() {
        let c = Constellation::qpsk();
        let mut out = Vec::new();
        pam_llrs(1.0, 0.0, &c, LlrMode::Exact, &mut out);
        assert_eq!(out[0], LLR_LIMIT);
    }
}
