//! Seeded randomness.
//!
//! Every experiment has one root seed. Each trial derives its own generators from
//! `(root, trial)`, one per named stream, so that adding draws to one stream never
//! shifts the values seen by another.
//!
//! Protocol code draws its coin flips through [`BitSource`], which is implemented
//! both for ordinary RNGs and for [`Tape`], a fixed bit sequence. Enumerating all
//! tapes enumerates all protocol randomness.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type SimRng = ChaCha8Rng;

/// Named randomness streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    StateGeneration = 1,
    ProtocolRandomness = 2,
    Adversary = 3,
    Messages = 4,
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    root: u64,
}

impl SeedTree {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn stream(&self, stream: Stream, index: u64) -> SimRng {
        let mut rng = SimRng::seed_from_u64(mix(self.root ^ mix(index)));
        rng.set_stream(stream as u64);
        rng
    }

    pub fn trial(&self, index: u64) -> TrialStreams {
        TrialStreams {
            state: self.stream(Stream::StateGeneration, index),
            protocol: self.stream(Stream::ProtocolRandomness, index),
            adversary: self.stream(Stream::Adversary, index),
            messages: self.stream(Stream::Messages, index),
        }
    }
}

/// The per-trial generators.
#[derive(Debug, Clone)]
pub struct TrialStreams {
    pub state: SimRng,
    pub protocol: SimRng,
    /// Drives adversarial and physical sources (e.g. GHZ copy preparation).
    pub adversary: SimRng,
    pub messages: SimRng,
}

impl TrialStreams {
    pub fn from_seed(seed: u64) -> Self {
        SeedTree::new(seed).trial(0)
    }
}

/// A supply of uniform protocol coin flips.
pub trait BitSource {
    fn next_bit(&mut self) -> Result<u8>;
}

impl<R: RngCore> BitSource for R {
    fn next_bit(&mut self) -> Result<u8> {
        Ok(self.gen::<bool>() as u8)
    }
}

/// A fixed sequence of coin flips, consumed front to back.
#[derive(Debug, Clone)]
pub struct Tape {
    bits: Vec<u8>,
    pos: usize,
}

impl Tape {
    pub fn new(bits: Vec<u8>) -> Self {
        Self { bits, pos: 0 }
    }

    /// Tape holding the `width` low bits of `index`, most significant first.
    pub fn from_index(index: u64, width: usize) -> Self {
        Self::new(crate::bits::index_to_bits(index, width))
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }
}

impl BitSource for Tape {
    fn next_bit(&mut self) -> Result<u8> {
        let bit = *self.bits.get(self.pos).ok_or(Error::TapeExhausted(self.pos))?;
        self.pos += 1;
        Ok(bit)
    }
}

/// Counts how many bits a run consumes. Always yields 0.
#[derive(Debug, Default, Clone)]
pub struct CountingSource {
    pub count: usize,
}

impl BitSource for CountingSource {
    fn next_bit(&mut self) -> Result<u8> {
        self.count += 1;
        Ok(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let tree = SeedTree::new(7);
        let a: u64 = tree.stream(Stream::StateGeneration, 3).gen();
        let b: u64 = tree.stream(Stream::StateGeneration, 3).gen();
        let c: u64 = tree.stream(Stream::ProtocolRandomness, 3).gen();
        let d: u64 = tree.stream(Stream::StateGeneration, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn tape_runs_out() {
        let mut tape = Tape::from_index(0b10, 2);
        assert_eq!(tape.next_bit().unwrap(), 1);
        assert_eq!(tape.next_bit().unwrap(), 0);
        assert_eq!(tape.next_bit(), Err(Error::TapeExhausted(2)));
    }
}
