// SPDX-License-Identifier: Apache-2.0

//! Cycle-level model of an iterative DES core whose registers are wired
//! into a single scan chain in a seed-dependent order.
//!
//! Timing: cycle 1 loads the input register, cycle 2 loads `L0/R0` from
//! `IP(input)`, cycles 3..=18 perform rounds 1..=16, and cycle 19 loads the
//! output register. Later cycles leave every register unchanged.
//!
//! The chain covers input(64) + L(32) + R(32) + output(64) = 192 flip-flops.
//! The round-key ROM and the controller are not on the chain.

use std::fmt;

use thiserror::Error;

use crate::des::{self, Block64, HalfBlock32, HexError, Key64, RoundKeys};
use crate::prng::SplitMix64;

pub const CHAIN_LEN: usize = 192;
/// Cycles needed for a complete encryption or decryption.
pub const FULL_RUN_CYCLES: usize = 19;
pub const DEFAULT_SEED: u64 = 1;

const INPUT_BASE: usize = 0;
const L_BASE: usize = 64;
const R_BASE: usize = 96;
const OUTPUT_BASE: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmulatorError {
    #[error("invalid hex value: {0}")]
    Hex(#[from] HexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Encrypt,
    Decrypt,
}

/// Bijection from register-bit index (input, L, R, output, MSB first) to
/// scan-chain position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanPermutation {
    position_of: Vec<usize>,
}

impl ScanPermutation {
    fn shuffled(rng: &mut SplitMix64) -> Self {
        let mut position_of: Vec<usize> = (0..CHAIN_LEN).collect();
        rng.shuffle(&mut position_of);
        Self { position_of }
    }

    pub fn position_of(&self, register_bit: usize) -> usize {
        self.position_of[register_bit]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.position_of
    }
}

/// One scan-out snapshot, indexed by chain position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScanFrame(Vec<bool>);

impl ScanFrame {
    pub fn from_bits(bits: Vec<bool>) -> Option<Self> {
        (bits.len() == CHAIN_LEN).then_some(Self(bits))
    }

    pub fn parse(text: &str) -> Option<Self> {
        let bits: Option<Vec<bool>> = text
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        bits.and_then(Self::from_bits)
    }

    pub fn bit(&self, position: usize) -> bool {
        self.0[position]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn active_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }
}

impl fmt::Display for ScanFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Register contents, as a white-box view for self-tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Registers {
    pub input: Block64,
    pub l: HalfBlock32,
    pub r: HalfBlock32,
    pub output: Block64,
}

impl Registers {
    /// Flattened register bits in register-index order.
    pub fn to_bits(&self) -> Vec<bool> {
        let mut bits = Vec::with_capacity(CHAIN_LEN);
        bits.extend(self.input.to_bits());
        bits.extend(self.l.to_bits());
        bits.extend(self.r.to_bits());
        bits.extend(self.output.to_bits());
        bits
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    /// Output register after the last cycle, as 16 uppercase hex digits.
    pub output: String,
    /// One frame per clock cycle.
    pub frames: Vec<ScanFrame>,
}

/// Anything the scan attack can drive: reset, clock with an input, scan out.
pub trait ScanDevice {
    fn reinit(&mut self);
    fn run(&mut self, input: &str, mode: Mode, num_cycles: usize) -> Result<RunOutput, EmulatorError>;
}

#[derive(Debug, Clone)]
pub struct Emulator {
    seed: u64,
    key: Key64,
    round_keys: RoundKeys,
    chain: ScanPermutation,
    regs: Registers,
    cycle: usize,
    mode: Mode,
}

impl Emulator {
    /// Builds the emulator for `seed`. The scan order is drawn first, then
    /// (unless forced) the key.
    pub fn new(seed: u64, force_key: Option<Key64>) -> Self {
        let mut rng = SplitMix64::new(seed);
        let chain = ScanPermutation::shuffled(&mut rng);
        let key = force_key.unwrap_or_else(|| Key64::new(rng.next_u64()).with_even_parity());
        Self {
            seed,
            key,
            round_keys: des::derive_round_keys(key),
            chain,
            regs: Registers::default(),
            cycle: 0,
            mode: Mode::Encrypt,
        }
    }

    pub fn with_seed(seed: u64) -> Self {
        Self::new(seed, None)
    }

    pub fn from_hex_key(seed: Option<u64>, force_key: Option<&str>) -> Result<Self, EmulatorError> {
        let key = force_key.map(Key64::from_hex).transpose()?;
        Ok(Self::new(seed.unwrap_or(DEFAULT_SEED), key))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The embedded key. Only for checking an attack's answer.
    pub fn key(&self) -> Key64 {
        self.key
    }

    pub fn scan_permutation(&self) -> &ScanPermutation {
        &self.chain
    }

    pub fn registers(&self) -> Registers {
        self.regs
    }

    pub fn cycle_count(&self) -> usize {
        self.cycle
    }

    pub fn reset(&mut self) {
        self.regs = Registers::default();
        self.cycle = 0;
    }

    fn round_key_for(&self, round: usize) -> des::Expanded48 {
        match self.mode {
            Mode::Encrypt => self.round_keys.get(round),
            Mode::Decrypt => self.round_keys.get(17 - round),
        }
    }

    /// Advances one clock cycle with `input` on the data pins.
    pub fn clock(&mut self, input: Block64) {
        self.cycle += 1;
        match self.cycle {
            1 => self.regs.input = input,
            2 => {
                let (l, r) = des::initial_permutation(self.regs.input).split();
                self.regs.l = l;
                self.regs.r = r;
            }
            c @ 3..=18 => {
                let k = self.round_key_for(c - 2);
                (self.regs.l, self.regs.r) = des::round(self.regs.l, self.regs.r, k);
            }
            19 => {
                self.regs.output = des::final_permutation(des::preoutput(self.regs.l, self.regs.r));
            }
            _ => {}
        }
    }

    pub fn scan_out(&self) -> ScanFrame {
        let mut bits = vec![false; CHAIN_LEN];
        for (idx, bit) in self.regs.to_bits().into_iter().enumerate() {
            bits[self.chain.position_of(idx)] = bit;
        }
        ScanFrame(bits)
    }

    pub fn run_block(&mut self, input: Block64, mode: Mode, num_cycles: usize) -> (Block64, Vec<ScanFrame>) {
        self.reset();
        self.mode = mode;
        let frames = (0..num_cycles)
            .map(|_| {
                self.clock(input);
                self.scan_out()
            })
            .collect();
        (self.regs.output, frames)
    }

    pub fn run_full(&mut self, input: &str, mode: Mode) -> Result<RunOutput, EmulatorError> {
        ScanDevice::run(self, input, mode, FULL_RUN_CYCLES)
    }
}

impl ScanDevice for Emulator {
    fn reinit(&mut self) {
        self.reset();
    }

    fn run(&mut self, input: &str, mode: Mode, num_cycles: usize) -> Result<RunOutput, EmulatorError> {
        let block = Block64::from_hex(input)?;
        let (output, frames) = self.run_block(block, mode, num_cycles);
        Ok(RunOutput {
            output: output.to_hex(),
            frames,
        })
    }
}

/// Register-bit index of input bit `n` (1-based).
pub const fn input_bit_index(n: usize) -> usize {
    INPUT_BASE + n - 1
}

pub const fn l_bit_index(n: usize) -> usize {
    L_BASE + n - 1
}

pub const fn r_bit_index(n: usize) -> usize {
    R_BASE + n - 1
}

pub const fn output_bit_index(n: usize) -> usize {
    OUTPUT_BASE + n - 1
}
