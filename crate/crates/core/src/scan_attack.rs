// SPDX-License-Identifier: Apache-2.0

//! Black-box key extraction through the scan chain.
//!
//! 1. Locate the input, L and R flip-flops in the chain with one-hot inputs.
//! 2. Feed inputs with `L0 = 0` and chosen `E(R0)` patterns, read `R1` back
//!    out of the chain, undo `P`, and invert the s-boxes to pin down round
//!    key 1.
//! 3. Invert the key schedule for round 1 and brute-force the eight key bits
//!    that round key 1 does not cover.

use std::fmt;

use thiserror::Error;

use crate::des::{
    self, tables, Block64, Expanded48, HalfBlock32, HexError, Key64, PermTable,
};
use crate::emulator::{EmulatorError, Mode, ScanDevice, ScanFrame, CHAIN_LEN, FULL_RUN_CYCLES};

/// The three inputs that give `L0 = 0` and drive point `a` to
/// `000000…`, `001000…` and `100010 100010 101000 000101 010001 010001 010101 010010`.
pub const SPECIAL_INPUTS: [&str; 3] = ["0000000000000000", "0000AA000000AA00", "8220000A8002200A"];

/// Plaintext encrypted once to obtain the pair checked during brute force.
pub const DEFAULT_PLAINTEXT: &str = "0BADC0DEDEADC0DE";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScanAttackError {
    #[error(transparent)]
    Emulator(#[from] EmulatorError),
    #[error(transparent)]
    Hex(#[from] HexError),
    #[error("scan protocol violated: {0}")]
    Protocol(String),
    #[error("special input {0} does not clear L0")]
    NonZeroL0(String),
    #[error("s-box {sbox}: no key fragment is consistent with every special input")]
    EmptyIntersection { sbox: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("none of the {tested} candidate keys reproduces the known ciphertext")]
    NoMatchingKey { tested: usize },
}

/// Chain positions of the input, L and R register bits (bit 1 first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanMap {
    pub input_indices: [usize; 64],
    pub l_indices: [usize; 32],
    pub r_indices: [usize; 32],
}

impl ScanMap {
    fn is_consistent(&self) -> bool {
        let mut seen = [false; CHAIN_LEN];
        self.input_indices
            .iter()
            .chain(&self.l_indices)
            .chain(&self.r_indices)
            .all(|&p| p < CHAIN_LEN && !std::mem::replace(&mut seen[p], true))
    }
}

/// Possible 6-bit key fragments per s-box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateChunks(pub [Vec<u8>; 8]);

impl CandidateChunks {
    pub fn sbox(&self, index: usize) -> &[u8] {
        &self.0[index]
    }

    /// Number of round keys the chunks expand to.
    pub fn product_size(&self) -> usize {
        self.0.iter().map(Vec::len).product()
    }
}

impl fmt::Display for CandidateChunks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, chunks) in self.0.iter().enumerate() {
            write!(f, "s-box {}:", i + 1)?;
            for c in chunks {
                write!(f, " {c:06b}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackReport {
    pub recovered_key: Key64,
    pub round_key_1: Expanded48,
    pub round_key_candidates: usize,
    pub candidates_tested: usize,
    pub oracle_runs: usize,
}

impl fmt::Display for AttackReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "recovered_key: {}", self.recovered_key)?;
        writeln!(f, "round_key_1: {}", self.round_key_1)?;
        writeln!(f, "round_key_candidates: {}", self.round_key_candidates)?;
        writeln!(f, "candidates_tested: {}", self.candidates_tested)?;
        writeln!(f, "oracle_runs: {}", self.oracle_runs)
    }
}

/// Phase 1: for each of the 64 one-hot inputs, the frame after cycle 1
/// exposes the input flip-flop and the frame after cycle 2 the L/R
/// flip-flop it was permuted into.
pub fn map_scan_chain<D: ScanDevice>(device: &mut D) -> Result<ScanMap, ScanAttackError> {
    let mut input_indices = [usize::MAX; 64];
    let mut l_indices = [usize::MAX; 32];
    let mut r_indices = [usize::MAX; 32];

    for i in 0..64 {
        device.reinit();
        let hex = Block64::new(1u64 << (63 - i)).to_hex();
        let run = device.run(&hex, Mode::Encrypt, 2)?;
        let [first, second] = run.frames.as_slice() else {
            return Err(ScanAttackError::Protocol(format!(
                "expected 2 frames, got {}",
                run.frames.len()
            )));
        };
        if first.count_ones() != 1 || second.count_ones() != 2 {
            return Err(ScanAttackError::Protocol(format!(
                "input bit {}: frame weights {} and {}, expected 1 and 2",
                i + 1,
                first.count_ones(),
                second.count_ones()
            )));
        }
        let input_pos = first.active_positions().next().unwrap();
        let Some(lr_pos) = second.active_positions().find(|&p| p != input_pos) else {
            return Err(ScanAttackError::Protocol(format!(
                "input bit {} vanished from the second frame",
                i + 1
            )));
        };
        input_indices[i] = input_pos;

        // FP is IP^-1, so FP[i] is where input bit i+1 lands after IP.
        let after_ip = tables::FP.entries[i] as usize - 1;
        if after_ip < 32 {
            l_indices[after_ip] = lr_pos;
        } else {
            r_indices[after_ip - 32] = lr_pos;
        }
    }

    let map = ScanMap {
        input_indices,
        l_indices,
        r_indices,
    };
    if !map.is_consistent() {
        return Err(ScanAttackError::Protocol("recovered chain positions collide".into()));
    }
    Ok(map)
}

pub fn read_l_r(map: &ScanMap, frame: &ScanFrame) -> (HalfBlock32, HalfBlock32) {
    let gather = |indices: &[usize]| {
        HalfBlock32::new(indices.iter().fold(0u32, |acc, &p| (acc << 1) | frame.bit(p) as u32))
    };
    (gather(&map.l_indices), gather(&map.r_indices))
}

/// `a = E(R0)` where `R0` is the right half of `IP(input)`.
pub fn compute_point_a(input: &str) -> Result<Expanded48, ScanAttackError> {
    let block = Block64::from_hex(input)?;
    let (_, r0) = des::initial_permutation(block).split();
    Ok(des::expand(r0))
}

fn undo_p(d: HalfBlock32) -> HalfBlock32 {
    HalfBlock32::new(des::permute_word(d.value() as u64, &tables::P_INV) as u32)
}

/// Runs three cycles on `special_input`, reads `R1` from the last frame and
/// undoes `P`. With `L0 = 0`, `R1` equals `P(c)`.
pub fn recover_point_c<D: ScanDevice>(
    device: &mut D,
    map: &ScanMap,
    special_input: &str,
) -> Result<HalfBlock32, ScanAttackError> {
    let block = Block64::from_hex(special_input)?;
    let (l0, _) = des::initial_permutation(block).split();
    if l0.value() != 0 {
        return Err(ScanAttackError::NonZeroL0(special_input.to_string()));
    }
    device.reinit();
    let run = device.run(special_input, Mode::Encrypt, 3)?;
    let frame = run
        .frames
        .get(2)
        .ok_or_else(|| ScanAttackError::Protocol("expected 3 frames".into()))?;
    let (_, r1) = read_l_r(map, frame);
    Ok(undo_p(r1))
}

/// For each s-box, the four inputs (one per row) that produce the observed
/// output nibble, each XORed with that s-box's slice of `a`.
pub fn reverse_sboxes(c: HalfBlock32, a: Expanded48) -> CandidateChunks {
    let boxes = std::array::from_fn(|i| {
        let value = c.nibble(i);
        let a_chunk = a.chunk(i);
        (0..4u8)
            .map(|row| {
                let col = tables::SBOXES[i][row as usize]
                    .iter()
                    .position(|&v| v == value)
                    .expect("every s-box row is a permutation") as u8;
                let six = ((row & 0b10) << 4) | (col << 1) | (row & 1);
                six ^ a_chunk
            })
            .collect()
    });
    CandidateChunks(boxes)
}

/// Keeps the fragments of the first set that appear in every other set.
pub fn intersect_candidates(sets: &[CandidateChunks]) -> Result<CandidateChunks, ScanAttackError> {
    let (first, rest) = sets
        .split_first()
        .ok_or_else(|| ScanAttackError::InvalidArgument("no candidate sets to intersect".into()))?;
    let mut out = first.clone();
    for (i, chunks) in out.0.iter_mut().enumerate() {
        chunks.retain(|c| rest.iter().all(|other| other.0[i].contains(c)));
        if chunks.is_empty() {
            return Err(ScanAttackError::EmptyIntersection { sbox: i + 1 });
        }
    }
    Ok(out)
}

/// Cartesian product of the per-s-box fragments, s-box 8 varying fastest.
pub fn assemble_round_keys(chunks: &CandidateChunks) -> Result<Vec<Expanded48>, ScanAttackError> {
    if let Some(i) = chunks.0.iter().position(Vec::is_empty) {
        return Err(ScanAttackError::InvalidArgument(format!(
            "s-box {} has no candidate fragments",
            i + 1
        )));
    }
    let mut keys = vec![0u64];
    for fragments in &chunks.0 {
        keys = keys
            .iter()
            .flat_map(|&prefix| fragments.iter().map(move |&f| (prefix << 6) | f as u64))
            .collect();
    }
    Ok(keys.into_iter().map(Expanded48::new).collect())
}

fn scatter(bits: &[Option<bool>], table: &PermTable) -> Vec<Option<bool>> {
    let mut out = vec![None; table.input_width];
    for (&src, &bit) in table.entries.iter().zip(bits) {
        out[src as usize - 1] = bit;
    }
    out
}

/// Every parity-normalised key whose first round key is `rk1`: undo PC2,
/// rotate each half right by one, undo PC1, then enumerate the eight
/// positions PC2 discarded.
pub fn invert_key_schedule(rk1: Expanded48) -> Vec<Key64> {
    let rk_bits: Vec<Option<bool>> = rk1.to_bits().into_iter().map(Some).collect();
    let mut cd = scatter(&rk_bits, &tables::PC2);
    let shift = tables::SHIFTS[0] as usize;
    cd[..28].rotate_right(shift);
    cd[28..].rotate_right(shift);
    let key_bits = scatter(&cd, &tables::PC1);

    let unknown: Vec<usize> = (0..64)
        .filter(|&i| key_bits[i].is_none() && (i + 1) % 8 != 0)
        .collect();
    let base = key_bits
        .iter()
        .fold(0u64, |acc, b| (acc << 1) | b.unwrap_or(false) as u64);

    (0u64..1 << unknown.len())
        .map(|fill| {
            let mut raw = base;
            for (j, &pos) in unknown.iter().enumerate() {
                // First unknown position varies slowest.
                if (fill >> (unknown.len() - 1 - j)) & 1 == 1 {
                    raw |= 1u64 << (63 - pos);
                }
            }
            Key64::new(raw).with_even_parity()
        })
        .collect()
}

/// The lowest-index candidate that maps `plaintext` to `ciphertext`, and the
/// number of candidates tried.
pub fn brute_force_key(
    candidates: &[Key64],
    plaintext: Block64,
    ciphertext: Block64,
) -> Result<(Key64, usize), ScanAttackError> {
    if candidates.is_empty() {
        return Err(ScanAttackError::InvalidArgument("empty candidate list".into()));
    }
    candidates
        .iter()
        .position(|&k| des::encrypt_block(k, plaintext) == ciphertext)
        .map(|i| (candidates[i], i + 1))
        .ok_or(ScanAttackError::NoMatchingKey {
            tested: candidates.len(),
        })
}

/// Knobs for [`full_scan_attack_with`].
#[derive(Debug, Clone)]
pub struct AttackConfig {
    pub special_inputs: Vec<String>,
    pub plaintext: String,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            special_inputs: SPECIAL_INPUTS.iter().map(|s| s.to_string()).collect(),
            plaintext: DEFAULT_PLAINTEXT.to_string(),
        }
    }
}

/// Candidate fragments per s-box after intersecting all special inputs.
pub fn round_key_chunks<D: ScanDevice>(
    device: &mut D,
    map: &ScanMap,
    special_inputs: &[String],
) -> Result<CandidateChunks, ScanAttackError> {
    let sets = special_inputs
        .iter()
        .map(|input| {
            let a = compute_point_a(input)?;
            let c = recover_point_c(device, map, input)?;
            Ok(reverse_sboxes(c, a))
        })
        .collect::<Result<Vec<_>, ScanAttackError>>()?;
    intersect_candidates(&sets)
}

pub fn full_scan_attack<D: ScanDevice>(device: &mut D) -> Result<AttackReport, ScanAttackError> {
    full_scan_attack_with(device, &AttackConfig::default())
}

pub fn full_scan_attack_with<D: ScanDevice>(
    device: &mut D,
    config: &AttackConfig,
) -> Result<AttackReport, ScanAttackError> {
    let map = map_scan_chain(device)?;
    let mut oracle_runs = 64;

    let chunks = round_key_chunks(device, &map, &config.special_inputs)?;
    oracle_runs += config.special_inputs.len();
    let round_keys = assemble_round_keys(&chunks)?;

    device.reinit();
    let plaintext = Block64::from_hex(&config.plaintext)?;
    let known = device.run(&config.plaintext, Mode::Encrypt, FULL_RUN_CYCLES)?;
    oracle_runs += 1;
    let ciphertext = Block64::from_hex(&known.output)?;

    let mut tested = 0;
    for rk1 in &round_keys {
        let candidates = invert_key_schedule(*rk1);
        match brute_force_key(&candidates, plaintext, ciphertext) {
            Ok((key, n)) => {
                return Ok(AttackReport {
                    recovered_key: key,
                    round_key_1: *rk1,
                    round_key_candidates: round_keys.len(),
                    candidates_tested: tested + n,
                    oracle_runs,
                });
            }
            Err(ScanAttackError::NoMatchingKey { tested: n }) => tested += n,
            Err(e) => return Err(e),
        }
    }
    Err(ScanAttackError::NoMatchingKey { tested })
}
