use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Cplx;
use crate::error::{invalid, Result};

/// Address of a reproducible random stream. ChaCha's 64-bit stream selector
/// carries `stream_id`, so streams sharing a seed never overlap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn generator(&self) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        SimRng(rng)
    }
}

#[derive(Clone, Debug)]
pub struct SimRng(ChaCha8Rng);

impl SimRng {
    /// Circularly symmetric complex Gaussian, `variance / 2` per real dimension.
    pub fn gaussian_pair(&mut self, variance: f64) -> Result<Cplx> {
        if !(variance >= 0.0) {
            return invalid(format!("negative noise variance {variance}"));
        }
        let s = (variance / 2.0).sqrt();
        let re: f64 = self.0.sample(StandardNormal);
        let im: f64 = self.0.sample(StandardNormal);
        Ok(Cplx::new(s * re, s * im))
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.0.random()
    }

    pub fn bits(&mut self, n: usize) -> Vec<u8> {
        (0..n).map(|_| self.0.random::<bool>() as u8).collect()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance_is_exactly_zero() {
        let mut g = RngStream::new(1, 2).generator();
        assert_eq!(g.gaussian_pair(0.0).unwrap(), Cplx::new(0.0, 0.0));
    }

    #[test]
    fn negative_variance_rejected() {
        let mut g = RngStream::new(1, 2).generator();
        assert!(g.gaussian_pair(-1.0).is_err());
        assert!(g.gaussian_pair(f64::NAN).is_err());
    }

    #[test]
    fn same_address_same_draws() {
        let a: Vec<_> = {
            let mut g = RngStream::new(99, 5).generator();
            (0..8).map(|_| g.gaussian_pair(1.0).unwrap()).collect()
        };
        let mut g = RngStream::new(99, 5).generator();
        let b: Vec<_> = (0..8).map(|_| g.gaussian_pair(1.0).unwrap()).collect();
        assert_eq!(a, b);
        let mut other = RngStream::new(99, 6).generator();
        assert_ne!(a[0], other.gaussian_pair(1.0).unwrap());
    }

    #[test]
    fn moments_and_decorrelation() {
        let mut g = RngStream::new(2024, 0).generator();
        let n = 1_000_000;
        let (mut p, mut ri) = (0.0, 0.0);
        let (mut rr, mut ii) = (0.0, 0.0);
        for _ in 0..n {
            let v = g.gaussian_pair(1.0).unwrap();
            p += v.norm_sqr();
            ri += v.re * v.im;
            rr += v.re * v.re;
            ii += v.im * v.im;
        }
        let mean_power = p / n as f64;
        assert!((mean_power - 1.0).abs() < 0.01, "power {mean_power}");
        let corr = ri / (rr * ii).sqrt();
        assert!(corr.abs() < 0.01, "corr {corr}");
    }

    #[test]
    fn independent_streams_uncorrelated() {
        let mut a = RngStream::new(5, 0).generator();
        let mut b = RngStream::new(5, 1).generator();
        let n = 200_000;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += a.standard_normal() * b.standard_normal();
        }
        assert!((acc / n as f64).abs() < 0.01);
    }
}
