//! Fixed-length bit strings and partially determined patterns.
//!
//! A string of length `n = 2^L` is stored as a `u64` word whose bit `i` is
//! position `i` of the string. The same word is the truth table of an
//! `L`-input Boolean function under the convention that input `j` carries
//! bit `j` of the index (least significant first). Text forms list position
//! 0 first.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported input count; `2^6 = 64` positions fill one word.
pub const MAX_INPUTS: u8 = 6;

pub fn check_inputs(inputs: u8) -> Result<()> {
    if (1..=MAX_INPUTS).contains(&inputs) {
        Ok(())
    } else {
        Err(Error::InputCount(inputs as usize))
    }
}

/// Number of positions `n = 2^L`.
#[inline]
pub fn string_len(inputs: u8) -> usize {
    1usize << inputs
}

/// Word with the low `2^L` bits set.
#[inline]
pub fn full_mask(inputs: u8) -> u64 {
    let n = string_len(inputs);
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Truth table of input `j`: bit `i` is set iff bit `j` of `i` is set.
pub fn input_word(inputs: u8, j: u8) -> u64 {
    const PROJ: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    PROJ[j as usize] & full_mask(inputs)
}

/// `log2(len)` when `len` is a supported power of two.
pub fn inputs_for_len(len: usize) -> Result<u8> {
    if len < 2 || !len.is_power_of_two() || len > 64 {
        return Err(Error::Length(len));
    }
    Ok(len.trailing_zeros() as u8)
}

/// An element of `B^n` with `n = 2^L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    inputs: u8,
    bits: u64,
}

impl BitString {
    pub fn new(inputs: u8, bits: u64) -> Result<Self> {
        check_inputs(inputs)?;
        Ok(Self { inputs, bits: bits & full_mask(inputs) })
    }

    pub(crate) fn from_word(inputs: u8, bits: u64) -> Self {
        Self { inputs, bits: bits & full_mask(inputs) }
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let inputs = inputs_for_len(bits.len())?;
        let word = bits
            .iter()
            .enumerate()
            .fold(0u64, |w, (i, &b)| w | ((b as u64) << i));
        Ok(Self { inputs, bits: word })
    }

    /// Every string of length `2^L`, in increasing word order.
    pub fn all(inputs: u8) -> impl Iterator<Item = BitString> {
        assert!(inputs <= 4, "enumerating B^n is only supported for n <= 16");
        (0..=full_mask(inputs)).map(move |bits| BitString { inputs, bits })
    }

    pub fn inputs(&self) -> u8 {
        self.inputs
    }

    pub fn len(&self) -> usize {
        string_len(self.inputs)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn word(&self) -> u64 {
        self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.bits >> i) & 1 == 1
    }

    pub fn with_bit(self, i: usize, b: bool) -> Self {
        let bits = if b { self.bits | (1 << i) } else { self.bits & !(1 << i) };
        Self { bits, ..self }
    }

    /// The pattern determined on positions `0..k` and starred elsewhere.
    pub fn prefix(&self, k: usize) -> Pattern {
        assert!(k <= self.len());
        let determined = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
        Pattern { inputs: self.inputs, determined, value: self.bits & determined }
    }

    pub fn to_pattern(&self) -> Pattern {
        self.prefix(self.len())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Symbol(other)),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }
}

/// A string over `{0, 1, *}`, read as the set of its completions.
///
/// `value` is always a subset of `determined`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    inputs: u8,
    determined: u64,
    value: u64,
}

impl Pattern {
    pub fn new(inputs: u8, determined: u64, value: u64) -> Result<Self> {
        check_inputs(inputs)?;
        let determined = determined & full_mask(inputs);
        Ok(Self { inputs, determined, value: value & determined })
    }

    /// The fully starred pattern.
    pub fn any(inputs: u8) -> Result<Self> {
        Self::new(inputs, 0, 0)
    }

    /// Parses a pattern whose length must be exactly a power of two.
    pub fn parse(s: &str) -> Result<Self> {
        let inputs = inputs_for_len(s.chars().count())?;
        Self::parse_padded(s, inputs)
    }

    /// Parses a pattern of length at most `2^L`, right-padding with stars.
    pub fn parse_padded(s: &str, inputs: u8) -> Result<Self> {
        check_inputs(inputs)?;
        let n = string_len(inputs);
        let len = s.chars().count();
        if len > n {
            return Err(Error::TooLong { got: len, max: n });
        }
        let (mut determined, mut value) = (0u64, 0u64);
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => determined |= 1 << i,
                '1' => {
                    determined |= 1 << i;
                    value |= 1 << i;
                }
                '*' => {}
                other => return Err(Error::Symbol(other)),
            }
        }
        Ok(Self { inputs, determined, value })
    }

    pub fn inputs(&self) -> u8 {
        self.inputs
    }

    pub fn len(&self) -> usize {
        string_len(self.inputs)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn determined(&self) -> u64 {
        self.determined
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn star_count(&self) -> u32 {
        self.len() as u32 - self.determined.count_ones()
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        ((self.determined >> i) & 1 == 1).then(|| (self.value >> i) & 1 == 1)
    }

    /// Fixes position `i` to `b`.
    pub fn with_bit(self, i: usize, b: bool) -> Self {
        assert!(i < self.len());
        let determined = self.determined | (1 << i);
        let value = if b { self.value | (1 << i) } else { self.value & !(1 << i) };
        Self { determined, value, ..self }
    }

    /// Whether the truth-table word `word` is a completion of this pattern.
    #[inline]
    pub fn admits(&self, word: u64) -> bool {
        (word ^ self.value) & self.determined == 0
    }

    pub fn contains(&self, s: &BitString) -> bool {
        s.inputs() == self.inputs && self.admits(s.word())
    }

    /// All completions, in increasing word order.
    pub fn completions(&self) -> impl Iterator<Item = BitString> + '_ {
        let free: Vec<usize> = (0..self.len()).filter(|&i| self.get(i).is_none()).collect();
        assert!(free.len() < 32, "too many stars to enumerate completions");
        (0u64..(1u64 << free.len())).map(move |m| {
            let mut word = self.value;
            for (k, &pos) in free.iter().enumerate() {
                word |= ((m >> k) & 1) << pos;
            }
            BitString::from_word(self.inputs, word)
        })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(match self.get(i) {
                Some(true) => "1",
                Some(false) => "0",
                None => "*",
            })?;
        }
        Ok(())
    }
}

impl From<BitString> for Pattern {
    fn from(s: BitString) -> Self {
        s.to_pattern()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projections_are_lsb_first() {
        let x0 = BitString::new(2, input_word(2, 0)).unwrap();
        let x1 = BitString::new(2, input_word(2, 1)).unwrap();
        assert_eq!(x0.to_string(), "0101");
        assert_eq!(x1.to_string(), "0011");
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(matches!("010".parse::<BitString>(), Err(Error::Length(3))));
        assert!(matches!("01a1".parse::<BitString>(), Err(Error::Symbol('a'))));
        assert!(matches!(Pattern::parse("0*1"), Err(Error::Length(3))));
        assert!(matches!(
            Pattern::parse_padded("01010", 2),
            Err(Error::TooLong { got: 5, max: 4 })
        ));
    }

    #[test]
    fn padding_fills_with_stars() {
        let p = Pattern::parse_padded("01", 2).unwrap();
        assert_eq!(p.to_string(), "01**");
        assert_eq!(p.star_count(), 2);
        let c: Vec<String> = p.completions().map(|s| s.to_string()).collect();
        assert_eq!(c, ["0100", "0110", "0101", "0111"]);
    }

    #[test]
    fn prefix_pattern() {
        let s: BitString = "0110".parse().unwrap();
        assert_eq!(s.prefix(0).to_string(), "****");
        assert_eq!(s.prefix(3).to_string(), "011*");
        assert_eq!(s.prefix(4).to_string(), "0110");
        assert!(s.prefix(2).contains(&s));
    }

    #[test]
    fn full_width_strings() {
        let s = BitString::new(6, u64::MAX).unwrap();
        assert_eq!(s.len(), 64);
        assert_eq!(s.to_string().parse::<BitString>().unwrap(), s);
        assert_eq!(s.prefix(64).determined(), u64::MAX);
    }
}
