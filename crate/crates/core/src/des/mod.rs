// SPDX-License-Identifier: Apache-2.0

//! Pure DES: permutations, the round function, the key schedule, and block
//! encryption/decryption.

mod block;
pub mod tables;

use thiserror::Error;

pub use block::{Block64, Expanded48, HalfBlock32, HexError, Key64};
pub use tables::PermTable;

use tables::{E, FP, IP, P, PC1, PC2, SBOXES, SHIFTS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesError {
    #[error("{table} expects {expected} input bits, got {got}")]
    WidthMismatch {
        table: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Hex(#[from] HexError),
}

/// Applies `table` to an arbitrary bit sequence (bit 1 first).
pub fn permute(input: &[bool], table: &PermTable) -> Result<Vec<bool>, DesError> {
    if input.len() != table.input_width {
        return Err(DesError::WidthMismatch {
            table: table.name,
            expected: table.input_width,
            got: input.len(),
        });
    }
    Ok(table.entries.iter().map(|&e| input[e as usize - 1]).collect())
}

/// Word-level [`permute`]: `value` holds `table.input_width` bits right-aligned.
pub fn permute_word(value: u64, table: &PermTable) -> u64 {
    let in_width = table.input_width as u32;
    table
        .entries
        .iter()
        .fold(0u64, |acc, &e| (acc << 1) | ((value >> (in_width - e as u32)) & 1))
}

pub fn expand(r: HalfBlock32) -> Expanded48 {
    Expanded48(permute_word(r.0 as u64, &E))
}

pub fn initial_permutation(block: Block64) -> Block64 {
    Block64(permute_word(block.0, &IP))
}

pub fn final_permutation(block: Block64) -> Block64 {
    Block64(permute_word(block.0, &FP))
}

/// Value of a single s-box for a 6-bit input `b1..b6`.
pub fn sbox_lookup(index: usize, six_bits: u8) -> u8 {
    let row = ((six_bits >> 4) & 0b10) | (six_bits & 1);
    let col = (six_bits >> 1) & 0xF;
    SBOXES[index][row as usize][col as usize]
}

/// Runs the eight s-boxes over consecutive 6-bit chunks.
pub fn sbox_substitute(b: Expanded48) -> HalfBlock32 {
    HalfBlock32((0..8).fold(0u32, |acc, i| (acc << 4) | sbox_lookup(i, b.chunk(i)) as u32))
}

/// The Feistel function: `P(S(E(r) ^ k))`.
pub fn feistel_f(r: HalfBlock32, k: Expanded48) -> HalfBlock32 {
    let c = sbox_substitute(expand(r) ^ k);
    HalfBlock32(permute_word(c.0 as u64, &P) as u32)
}

/// The 16 round keys of `key`, in encryption order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundKeys(pub [Expanded48; 16]);

impl RoundKeys {
    pub fn get(&self, round: usize) -> Expanded48 {
        self.0[round - 1]
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Expanded48> + '_ {
        self.0.iter().copied()
    }
}

fn rotl28(v: u32, n: u8) -> u32 {
    ((v << n) | (v >> (28 - n))) & 0x0FFF_FFFF
}

/// The 28-bit `(C, D)` halves after PC1.
pub fn pc1_halves(key: Key64) -> (u32, u32) {
    let cd = permute_word(key.0, &PC1);
    ((cd >> 28) as u32, (cd & 0x0FFF_FFFF) as u32)
}

pub fn derive_round_keys(key: Key64) -> RoundKeys {
    tables::validate();
    let (mut c, mut d) = pc1_halves(key);
    let mut keys = [Expanded48::default(); 16];
    for (slot, &shift) in keys.iter_mut().zip(SHIFTS.iter()) {
        c = rotl28(c, shift);
        d = rotl28(d, shift);
        let cd = ((c as u64) << 28) | d as u64;
        *slot = Expanded48(permute_word(cd, &PC2));
    }
    RoundKeys(keys)
}

/// One Feistel round: `(L, R) -> (R, L ^ f(R, k))`.
pub fn round(l: HalfBlock32, r: HalfBlock32, k: Expanded48) -> (HalfBlock32, HalfBlock32) {
    (r, l ^ feistel_f(r, k))
}

/// Final-round output: the last round is not followed by a swap, so the
/// halves enter FP as `R16 || L16`.
pub fn preoutput(l16: HalfBlock32, r16: HalfBlock32) -> Block64 {
    Block64::join(r16, l16)
}

fn crypt<'a>(keys: impl Iterator<Item = Expanded48>, block: Block64) -> Block64 {
    let (mut l, mut r) = initial_permutation(block).split();
    for k in keys {
        (l, r) = round(l, r, k);
    }
    final_permutation(preoutput(l, r))
}

pub fn encrypt_with(keys: &RoundKeys, block: Block64) -> Block64 {
    crypt(keys.iter(), block)
}

pub fn decrypt_with(keys: &RoundKeys, block: Block64) -> Block64 {
    crypt(keys.iter().rev(), block)
}

pub fn encrypt_block(key: Key64, block: Block64) -> Block64 {
    encrypt_with(&derive_round_keys(key), block)
}

pub fn decrypt_block(key: Key64, block: Block64) -> Block64 {
    decrypt_with(&derive_round_keys(key), block)
}

/// Hex-in, hex-out convenience wrapper.
pub fn encrypt_hex(key: &str, block: &str) -> Result<String, DesError> {
    Ok(encrypt_block(Key64::from_hex(key)?, Block64::from_hex(block)?).to_hex())
}

pub fn decrypt_hex(key: &str, block: &str) -> Result<String, DesError> {
    Ok(decrypt_block(Key64::from_hex(key)?, Block64::from_hex(block)?).to_hex())
}
