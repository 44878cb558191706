//! Small helpers for working with bits stored as `u8` values in `{0, 1}`.

use crate::error::{Error, Result};

/// Modulus for all share and mask arithmetic. The state is binary, so only 2 is used.
pub const MODULUS: u8 = 2;

pub fn add_mod(a: u8, b: u8) -> u8 {
    (a + b) % MODULUS
}

pub fn sub_mod(a: u8, b: u8) -> u8 {
    (a + MODULUS - b % MODULUS) % MODULUS
}

/// Sum of `bits` modulo [`MODULUS`].
pub fn parity(bits: &[u8]) -> u8 {
    bits.iter().fold(0, |acc, &b| add_mod(acc, b))
}

pub fn check_bits(bits: &[u8], what: &str) -> Result<()> {
    match bits.iter().position(|&b| b > 1) {
        Some(p) => Err(Error::Domain(format!("{what}: entry {p} is {} (expected 0 or 1)", bits[p]))),
        None => Ok(()),
    }
}

/// Renders bits as a compact `0`/`1` string.
pub fn to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

pub fn from_str(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::Domain(format!("invalid bit character {other:?}"))),
        })
        .collect()
}

/// The `width` low bits of `value`, most significant first.
pub fn index_to_bits(value: u64, width: usize) -> Vec<u8> {
    (0..width).rev().map(|k| ((value >> k) & 1) as u8).collect()
}

/// Inverse of [`index_to_bits`].
pub fn bits_to_index(bits: &[u8]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

/// All `2^width` bit strings of length `width` in lexicographic order.
pub fn all_strings(width: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1u64 << width).map(move |v| index_to_bits(v, width))
}

pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(&x, &y)| x ^ y).collect()
}
