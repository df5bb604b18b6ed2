use rustfft::FftPlanner;

use super::Cplx;
use crate::error::{invalid, Result};

pub fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

/// Unitary DFT (`1/√N` on both directions), so `dft(dft(x, false), true) == x`
/// and energy is preserved.
pub fn dft(x: &[Cplx], inverse: bool) -> Result<Vec<Cplx>> {
    let n = x.len();
    if !is_power_of_two(n) {
        return invalid(format!("DFT length {n} is not a power of two"));
    }
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut buf = x.to_vec();
    fft.process(&mut buf);
    let s = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= s);
    Ok(buf)
}
