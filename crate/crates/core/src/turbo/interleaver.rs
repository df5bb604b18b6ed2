use crate::numerics::RngStream;

/// Stream id reserved for interleaver construction.
const INTERLEAVER_STREAM: u64 = 0x1a7e_71ea_0e00_0001;

/// Pseudo-random block interleaver: a Fisher–Yates shuffle of `0..len`
/// driven by ChaCha8 seeded with `seed` on a dedicated stream.
/// `interleave(v)[k] = v[perm[k]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn new(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        RngStream::new(seed, INTERLEAVER_STREAM).generator().shuffle(&mut perm);
        Self { perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn interleave<T: Copy>(&self, v: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| v[p]).collect()
    }

    pub fn deinterleave<T: Copy + Default>(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); v.len()];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = v[k];
        }
        out
    }
}
