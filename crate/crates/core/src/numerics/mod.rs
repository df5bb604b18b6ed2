//! Small numeric toolkit shared by every other module: complex matrices,
//! the unitary DFT, seeded random streams and Gray-labelled constellations.

mod constellation;
mod dft;
mod linalg;
mod rng;

pub use constellation::{gray_map, Constellation, Modulation};
pub use dft::{dft, is_power_of_two};
pub use linalg::{cholesky2, CMat, Mat, RMat, Scalar};
pub use rng::{RngStream, SimRng};

/// Complex baseband sample.
pub type Cplx = num_complex::Complex64;

#[inline]
pub fn cplx(re: f64, im: f64) -> Cplx {
    Cplx::new(re, im)
}

/// `e^{-j 2π k d / n}`, the phase ramp of a `d`-sample delay on subcarrier `k`.
#[inline]
pub fn delay_phase(k: usize, d: usize, n: usize) -> Cplx {
    // Reduce first so large products keep full precision.
    let m = ((k as u128 * d as u128) % n as u128) as f64;
    Cplx::from_polar(1.0, -2.0 * std::f64::consts::PI * m / n as f64)
}
