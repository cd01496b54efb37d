//! Payload generation and the 1 + x^14 + x^15 data randomizer.

use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

/// A non-empty sequence of bits stored one per byte (0 or 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitBlock(Vec<u8>);

impl BitBlock {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(invalid("bit block must not be empty"));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(invalid(format!("bit value {b} is not 0 or 1")));
        }
        Ok(BitBlock(bits))
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }
}

impl Deref for BitBlock {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

/// `n` uniformly random bits from a ChaCha8 stream seeded with `seed`.
pub fn generate(seed: u64, n: usize) -> Result<BitBlock> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_from(&mut rng, n)
}

pub fn generate_from<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<BitBlock> {
    if n == 0 {
        return Err(invalid("cannot generate an empty bit block"));
    }
    let mut bits = Vec::with_capacity(n);
    while bits.len() < n {
        let word: u64 = rng.gen();
        let take = (n - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    Ok(BitBlock(bits))
}

/// Non-zero 15-bit randomizer state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LfsrSeed(u16);

impl LfsrSeed {
    pub const ALL_ONES: LfsrSeed = LfsrSeed(0x7fff);

    pub fn new(state: u16) -> Result<Self> {
        if state == 0 {
            return Err(invalid("randomizer seed must be non-zero (LFSR would stall)"));
        }
        if state > 0x7fff {
            return Err(invalid(format!("randomizer seed {state:#x} exceeds 15 bits")));
        }
        Ok(LfsrSeed(state))
    }

    pub fn value(self) -> u16 {
        self.0
    }
}

impl Default for LfsrSeed {
    fn default() -> Self {
        Self::ALL_ONES
    }
}

/// Fibonacci LFSR for 1 + x^14 + x^15.
#[derive(Debug, Clone)]
pub struct Prbs {
    state: u16,
}

impl Prbs {
    pub fn new(seed: LfsrSeed) -> Self {
        Prbs { state: seed.0 }
    }

    pub fn state(&self) -> u16 {
        self.state
    }

    pub fn next_bit(&mut self) -> u8 {
        let bit = (((self.state >> 14) ^ (self.state >> 13)) & 1) as u8;
        self.state = ((self.state << 1) | bit as u16) & 0x7fff;
        bit
    }
}

/// XORs `bits` with the PRBS started from `seed`. Self-inverse.
pub fn randomize(bits: &[u8], seed: LfsrSeed) -> Result<BitBlock> {
    if bits.is_empty() {
        return Err(invalid("cannot randomize an empty bit block"));
    }
    let mut prbs = Prbs::new(seed);
    Ok(BitBlock(bits.iter().map(|&b| b ^ prbs.next_bit()).collect()))
}

pub fn derandomize(bits: &[u8], seed: LfsrSeed) -> Result<BitBlock> {
    randomize(bits, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn generate_is_deterministic() {
        assert_eq!(generate(42, 8).unwrap(), generate(42, 8).unwrap());
        assert_ne!(generate(1, 256).unwrap(), generate(2, 256).unwrap());
    }

    #[test]
    fn generate_is_balanced() {
        let n = 1_000_000;
        let ones = generate(7, n).unwrap().iter().filter(|&&b| b == 1).count();
        let frac = ones as f64 / n as f64;
        assert!((0.49..=0.51).contains(&frac), "{frac}");
    }

    #[test]
    fn empty_rejected() {
        assert!(generate(0, 0).is_err());
        assert!(randomize(&[], LfsrSeed::ALL_ONES).is_err());
        assert!(BitBlock::new(vec![0, 2]).is_err());
    }

    #[test]
    fn zero_seed_rejected() {
        assert!(LfsrSeed::new(0).is_err());
        assert!(LfsrSeed::new(0x8000).is_err());
    }

    #[test]
    fn prbs_period() {
        let seed = LfsrSeed::ALL_ONES;
        let mut prbs = Prbs::new(seed);
        let mut period = 0usize;
        loop {
            prbs.next_bit();
            period += 1;
            if prbs.state() == seed.value() {
                break;
            }
            assert!(period < 40_000);
        }
        assert_eq!(period, 32_767);
    }

    #[test]
    fn zero_input_yields_prbs() {
        let seed = LfsrSeed::new(0x1234).unwrap();
        let mut prbs = Prbs::new(seed);
        let expected: Vec<u8> = (0..100).map(|_| prbs.next_bit()).collect();
        assert_eq!(&*randomize(&[0; 100], seed).unwrap(), &expected[..]);
        assert_eq!(&*derandomize(&[0; 100], seed).unwrap(), &expected[..]);
        // All-ones seed: the first 14 outputs are 0 (x^14 ^ x^15 of equal bits).
        let first = randomize(&[0; 16], LfsrSeed::ALL_ONES).unwrap();
        assert_eq!(&first[..14], &[0; 14]);
        assert_eq!(first[14], 1);
    }

    #[test]
    fn seed_mismatch_breaks_round_trip() {
        let b = generate(3, 1000).unwrap();
        let s1 = LfsrSeed::new(0x7fff).unwrap();
        let s2 = LfsrSeed::new(0x5555).unwrap();
        let out = derandomize(&randomize(&b, s1).unwrap(), s2).unwrap();
        assert_ne!(out, b);
    }

    proptest! {
        #[test]
        fn randomize_is_involution(bits in prop::collection::vec(0u8..2, 1..500), seed in 1u16..0x8000) {
            let seed = LfsrSeed::new(seed).unwrap();
            let once = randomize(&bits, seed).unwrap();
            prop_assert_eq!(once.len(), bits.len());
            let twice = derandomize(&once, seed).unwrap();
            prop_assert_eq!(&*twice, &bits[..]);
        }
    }
}
