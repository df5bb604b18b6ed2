use crate::error::{invalid, Result};

/// Trellis of a recursive systematic convolutional encoder given octal
/// generators with the `D⁰` coefficient in the most significant bit
/// (`0o13 = 1 + D² + D³`, `0o15 = 1 + D + D³`).
///
/// State bit `i - 1` holds the register content delayed by `i`.
#[derive(Clone, Debug)]
pub struct Trellis {
    memory: usize,
    next: Vec<[usize; 2]>,
    parity: Vec<[u8; 2]>,
    /// Input that drives the feedback sum to zero (used for tails).
    term_input: Vec<u8>,
}

impl Trellis {
    pub fn from_octal(feedback: u32, feedforward: u32) -> Result<Self> {
        if feedback == 0 || feedforward == 0 {
            return invalid("generator polynomials must be non-zero");
        }
        let memory = (31 - feedback.leading_zeros()) as usize;
        if memory == 0 || memory > 8 || (31 - feedforward.leading_zeros()) as usize > memory {
            return invalid(format!("unsupported generators {feedback:o}/{feedforward:o}"));
        }
        if (feedback >> memory) & 1 != 1 {
            return invalid("feedback polynomial needs a D⁰ term");
        }
        // coefficient of D^i
        let coef = |poly: u32, i: usize| ((poly >> (memory - i)) & 1) as u8;
        let states = 1usize << memory;
        let mut next = Vec::with_capacity(states);
        let mut parity = Vec::with_capacity(states);
        let mut term_input = Vec::with_capacity(states);
        for s in 0..states {
            let bit = |i: usize| ((s >> (i - 1)) & 1) as u8;
            let fb: u8 = (1..=memory).fold(0, |acc, i| acc ^ (coef(feedback, i) & bit(i)));
            let ff: u8 = (1..=memory).fold(0, |acc, i| acc ^ (coef(feedforward, i) & bit(i)));
            let mut n = [0usize; 2];
            let mut p = [0u8; 2];
            for u in 0..2u8 {
                let a = u ^ fb;
                p[u as usize] = (coef(feedforward, 0) & a) ^ ff;
                n[u as usize] = ((s << 1) | a as usize) & (states - 1);
            }
            next.push(n);
            parity.push(p);
            term_input.push(fb);
        }
        Ok(Self {
            memory,
            next,
            parity,
            term_input,
        })
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn states(&self) -> usize {
        self.next.len()
    }

    #[inline]
    pub fn next(&self, state: usize, input: u8) -> usize {
        self.next[state][input as usize]
    }

    #[inline]
    pub fn parity(&self, state: usize, input: u8) -> u8 {
        self.parity[state][input as usize]
    }

    /// Parity stream for `bits` plus the terminating `(input, parity)` tail.
    pub fn encode(&self, bits: &[u8]) -> (Vec<u8>, Vec<(u8, u8)>) {
        let mut s = 0;
        let parity = bits
            .iter()
            .map(|&u| {
                let p = self.parity(s, u);
                s = self.next(s, u);
                p
            })
            .collect();
        let tail = (0..self.memory)
            .map(|_| {
                let u = self.term_input[s];
                let p = self.parity(s, u);
                s = self.next(s, u);
                (u, p)
            })
            .collect();
        debug_assert_eq!(s, 0);
        (parity, tail)
    }
}
