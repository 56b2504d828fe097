//! Payload conversion: text, hex and 0/1 notation to and from [`BitString`],
//! plus greedy segmentation of one message across several carriers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One payload position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
    /// A position the decoder declined to decide.
    Erasure,
}

impl Bit {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Bit::Zero => '0',
            Bit::One => '1',
            Bit::Erasure => 'x',
        }
    }

    pub fn complement(self) -> Self {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
            Bit::Erasure => Bit::Erasure,
        }
    }
}

/// Ordered sequence of bits. Erasures only ever appear in decoder output.
///
/// `Display` renders the space-separated form (`1 0 x 1`); `FromStr` accepts
/// that form or the compact one (`10 1`) but never erasures.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitString {
    bits: Vec<Bit>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<Bit>) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[Bit] {
        &self.bits
    }

    pub fn get(&self, index: usize) -> Option<Bit> {
        self.bits.get(index).copied()
    }

    pub fn push(&mut self, bit: Bit) {
        self.bits.push(bit);
    }

    pub fn iter(&self) -> impl Iterator<Item = Bit> + '_ {
        self.bits.iter().copied()
    }

    pub fn erasure_count(&self) -> usize {
        self.bits.iter().filter(|b| **b == Bit::Erasure).count()
    }

    pub fn has_erasures(&self) -> bool {
        self.bits.contains(&Bit::Erasure)
    }

    /// First `n` bits (or all of them, if shorter).
    pub fn prefix(&self, n: usize) -> BitString {
        BitString::from_bits(self.bits[..n.min(self.len())].to_vec())
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a BitString>) -> BitString {
        BitString::from_bits(parts.into_iter().flat_map(|p| p.iter()).collect())
    }

    pub fn complement(&self) -> BitString {
        BitString::from_bits(self.bits.iter().map(|b| b.complement()).collect())
    }

    /// Renders `width` positions, padding with `x` past the end.
    pub fn to_padded_string(&self, width: usize) -> String {
        let symbols: Vec<String> = (0..width.max(self.len()))
            .map(|i| self.get(i).unwrap_or(Bit::Erasure).symbol().to_string())
            .collect();
        symbols.join(" ")
    }
}

impl FromIterator<Bit> for BitString {
    fn from_iter<I: IntoIterator<Item = Bit>>(iter: I) -> Self {
        BitString::from_bits(iter.into_iter().collect())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.bits.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", b.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_bitstring(s)
    }
}

/// Parses `0`/`1` notation, ignoring whitespace.
pub fn parse_bitstring(s: &str) -> Result<BitString> {
    s.chars()
        .enumerate()
        .filter(|(_, c)| !c.is_whitespace())
        .map(|(position, c)| match c {
            '0' => Ok(Bit::Zero),
            '1' => Ok(Bit::One),
            symbol => Err(Error::InvalidSymbol { symbol, position }),
        })
        .collect()
}

/// Bytes to bits, most significant bit first.
pub fn bytes_to_bits(bytes: &[u8]) -> BitString {
    bytes
        .iter()
        .flat_map(|byte| (0..8).rev().map(move |i| Bit::from_bool(byte >> i & 1 == 1)))
        .collect()
}

pub fn bits_to_bytes(bits: &BitString) -> Result<Vec<u8>> {
    if bits.has_erasures() {
        return Err(Error::ContainsErasures);
    }
    if !bits.len().is_multiple_of(8) {
        return Err(Error::NotByteAligned(bits.len()));
    }
    Ok(bits
        .bits()
        .chunks(8)
        .map(|chunk| chunk.iter().fold(0u8, |acc, b| acc << 1 | u8::from(*b == Bit::One)))
        .collect())
}

/// UTF-8 text to bits (eight per byte, MSB first).
pub fn text_to_bits(text: &str) -> BitString {
    bytes_to_bits(text.as_bytes())
}

/// Inverse of [`text_to_bits`]. Invalid UTF-8 is replaced lossily.
pub fn bits_to_text(bits: &BitString) -> Result<String> {
    let bytes = bits_to_bytes(bits)?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

pub fn hex_to_bits(s: &str) -> Result<BitString> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let compact = compact
        .strip_prefix("0x")
        .or_else(|| compact.strip_prefix("0X"))
        .unwrap_or(&compact);
    let bytes = hex::decode(compact).map_err(|e| Error::InvalidHex(e.to_string()))?;
    Ok(bytes_to_bits(&bytes))
}

/// Splits `message` greedily over carriers in order: each file is filled to
/// its capacity before moving on, so trailing files may get empty segments.
pub fn plan_spanning(message: &BitString, capacities: &[usize]) -> Result<Vec<BitString>> {
    let available: usize = capacities.iter().sum();
    if available < message.len() {
        return Err(Error::InsufficientCapacity {
            required: message.len(),
            available,
        });
    }
    let mut offset = 0;
    Ok(capacities
        .iter()
        .map(|&cap| {
            let take = cap.min(message.len() - offset);
            let segment = BitString::from_bits(message.bits()[offset..offset + take].to_vec());
            offset += take;
            segment
        })
        .collect())
}
