// SPDX-License-Identifier: Apache-2.0

//! Fixed-width bit vectors used throughout the DES datapath.
//!
//! All of them number their bits from 1 at the most significant end, so
//! `bit(1)` is the left-most bit of the hex rendering.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HexError {
    #[error("expected {expected} hex characters, got {got}")]
    Length { expected: usize, got: usize },
    #[error("invalid hex character {0:?}")]
    Digit(char),
}

fn parse_hex(text: &str, width_bits: u32) -> Result<u64, HexError> {
    let expected = (width_bits / 4) as usize;
    let text = text.trim();
    if text.len() != expected {
        return Err(HexError::Length {
            expected,
            got: text.chars().count(),
        });
    }
    if let Some(bad) = text.chars().find(|c| !c.is_ascii_hexdigit()) {
        return Err(HexError::Digit(bad));
    }
    Ok(u64::from_str_radix(text, 16).expect("validated hex digits"))
}

macro_rules! bit_word {
    ($(#[$meta:meta])* $name:ident, $repr:ty, $width:expr) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
        pub struct $name(pub(crate) $repr);

        impl $name {
            pub const WIDTH: u32 = $width;
            const MASK: u64 = if $width == 64 { u64::MAX } else { (1u64 << $width) - 1 };

            /// Wraps a raw value; bits above the width are discarded.
            pub const fn new(value: $repr) -> Self {
                Self(((value as u64) & Self::MASK) as $repr)
            }

            pub const fn value(self) -> $repr {
                self.0
            }

            /// Bit `index` counted from 1 at the MSB.
            pub fn bit(self, index: u32) -> bool {
                assert!((1..=Self::WIDTH).contains(&index), "bit index {index} out of range");
                (self.0 as u64 >> (Self::WIDTH - index)) & 1 == 1
            }

            pub fn with_bit(self, index: u32, value: bool) -> Self {
                assert!((1..=Self::WIDTH).contains(&index), "bit index {index} out of range");
                let mask = 1u64 << (Self::WIDTH - index);
                let raw = if value { self.0 as u64 | mask } else { self.0 as u64 & !mask };
                Self(raw as $repr)
            }

            /// Bits in MSB-first order.
            pub fn to_bits(self) -> Vec<bool> {
                (1..=Self::WIDTH).map(|i| self.bit(i)).collect()
            }

            pub fn from_bits(bits: &[bool]) -> Option<Self> {
                if bits.len() != Self::WIDTH as usize {
                    return None;
                }
                let raw = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
                Some(Self(raw as $repr))
            }

            pub fn count_ones(self) -> u32 {
                self.0.count_ones()
            }

            pub fn from_hex(text: &str) -> Result<Self, HexError> {
                parse_hex(text, Self::WIDTH).map(|v| Self(v as $repr))
            }

            pub fn to_hex(self) -> String {
                format!("{:0width$X}", self.0, width = (Self::WIDTH / 4) as usize)
            }

            /// Binary rendering, grouped by `group` bits and separated by spaces.
            pub fn to_grouped_binary(self, group: usize) -> String {
                let bits: String = self.to_bits().iter().map(|&b| if b { '1' } else { '0' }).collect();
                bits.as_bytes()
                    .chunks(group)
                    .map(|c| std::str::from_utf8(c).unwrap())
                    .collect::<Vec<_>>()
                    .join(" ")
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.to_hex())
            }
        }

        impl FromStr for $name {
            type Err = HexError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::from_hex(s)
            }
        }

        impl std::ops::BitXor for $name {
            type Output = Self;
            fn bitxor(self, rhs: Self) -> Self {
                Self(self.0 ^ rhs.0)
            }
        }
    };
}

bit_word!(
    /// A 64-bit data block (plaintext, ciphertext, or the input register).
    Block64, u64, 64
);
bit_word!(
    /// One half of the Feistel state, or a 32-bit intermediate value.
    HalfBlock32, u32, 32
);
bit_word!(
    /// A 48-bit value: the expanded half block or a round key.
    Expanded48, u64, 48
);
bit_word!(
    /// A DES key: 56 effective bits plus one parity bit per byte.
    Key64, u64, 64
);

impl Block64 {
    pub fn split(self) -> (HalfBlock32, HalfBlock32) {
        (
            HalfBlock32((self.0 >> 32) as u32),
            HalfBlock32(self.0 as u32),
        )
    }

    pub fn join(left: HalfBlock32, right: HalfBlock32) -> Self {
        Self(((left.0 as u64) << 32) | right.0 as u64)
    }
}

impl Expanded48 {
    /// The 6-bit chunk feeding s-box `index` (0-based).
    pub fn chunk(self, index: usize) -> u8 {
        assert!(index < 8);
        ((self.0 >> (42 - 6 * index)) & 0x3F) as u8
    }

    pub fn from_chunks(chunks: &[u8; 8]) -> Self {
        Self(chunks.iter().fold(0u64, |acc, &c| (acc << 6) | (c & 0x3F) as u64))
    }
}

impl HalfBlock32 {
    /// The 4-bit nibble emitted by s-box `index` (0-based).
    pub fn nibble(self, index: usize) -> u8 {
        assert!(index < 8);
        ((self.0 >> (28 - 4 * index)) & 0xF) as u8
    }
}

impl Key64 {
    /// Sets every byte's eighth bit to the XOR of its first seven bits.
    pub fn with_even_parity(self) -> Self {
        let mut raw = self.0;
        for byte in 0..8 {
            let shift = 8 * (7 - byte);
            let data = (raw >> (shift + 1)) & 0x7F;
            let parity = (data.count_ones() & 1) as u64;
            raw = (raw & !(1u64 << shift)) | (parity << shift);
        }
        Self(raw)
    }

    pub fn has_even_parity(self) -> bool {
        self.with_even_parity() == self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip_is_uppercase_fixed_width() {
        let b = Block64::from_hex("0badc0dedeadc0de").unwrap();
        assert_eq!(b.to_hex(), "0BADC0DEDEADC0DE");
        assert_eq!(Block64::new(1).to_hex(), "0000000000000001");
        assert_eq!(Expanded48::new(0xC321A119E699).to_hex(), "C321A119E699");
    }

    #[test]
    fn hex_rejects_bad_input() {
        assert_eq!(
            Block64::from_hex("ABC"),
            Err(HexError::Length { expected: 16, got: 3 })
        );
        assert_eq!(Block64::from_hex("+BADC0DEDEADC0DE"), Err(HexError::Digit('+')));
        assert_eq!(Block64::from_hex("0BADC0DEDEADC0DG"), Err(HexError::Digit('G')));
    }

    #[test]
    fn bit_one_is_msb() {
        let b = Block64::from_hex("8000000000000000").unwrap();
        assert!(b.bit(1));
        assert!(!b.bit(64));
        assert_eq!(Block64::new(0).with_bit(64, true), Block64::new(1));
    }

    #[test]
    fn chunks_and_nibbles() {
        let e = Expanded48::new(0b100100 << 42);
        assert_eq!(e.chunk(0), 0b100100);
        assert_eq!(Expanded48::from_chunks(&[0b100100, 0, 0, 0, 0, 0, 0, 0]), e);
        assert_eq!(HalfBlock32::new(0xF000_0001).nibble(0), 0xF);
        assert_eq!(HalfBlock32::new(0xF000_0001).nibble(7), 0x1);
    }

    #[test]
    fn parity_matches_first_seven_bits() {
        let k = Key64::new(0).with_bit(1, true).with_even_parity();
        assert!(k.bit(8));
        assert!(k.has_even_parity());
        assert!(Key64::from_hex("096F2B878D906CA0").unwrap().has_even_parity());
    }
}
