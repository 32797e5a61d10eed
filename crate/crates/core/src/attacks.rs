// SPDX-License-Identifier: Apache-2.0

//! Oracle-guided attacks on locked netlists.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

use crate::cnf::{build_miter, constrain_io, dpll_solve, CnfError, SolveResult};
use crate::netlist::{bits_to_string, index_to_bits, KeyVector, Netlist, NetlistError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("oracle has {oracle} {what}, locked netlist has {locked}")]
    InterfaceMismatch {
        what: &'static str,
        oracle: usize,
        locked: usize,
    },
    #[error("{got} primary inputs exceeds the exhaustive limit of {limit}")]
    TooManyInputs { limit: usize, got: usize },
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// A working chip: answers input queries and counts them. The key, if any,
/// stays private.
#[derive(Debug)]
pub struct Oracle {
    design: Netlist,
    key: Vec<bool>,
    queries: AtomicUsize,
}

impl Oracle {
    pub fn query(&self, input: &[bool]) -> Result<Vec<bool>, AttackError> {
        let out = self.design.evaluate(input, &self.key)?;
        self.queries.fetch_add(1, Ordering::Relaxed);
        Ok(out)
    }

    pub fn query_count(&self) -> usize {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn num_inputs(&self) -> usize {
        self.design.primary_inputs().len()
    }

    pub fn num_outputs(&self) -> usize {
        self.design.outputs().len()
    }
}

/// Oracle backed by an unlocked netlist.
pub fn make_oracle(n: Netlist) -> Result<Oracle, AttackError> {
    make_oracle_locked(n, KeyVector::default())
}

/// Oracle backed by a locked netlist activated with `key`.
pub fn make_oracle_locked(locked: Netlist, key: KeyVector) -> Result<Oracle, AttackError> {
    if key.len() != locked.key_inputs().len() {
        return Err(NetlistError::KeyLength {
            expected: locked.key_inputs().len(),
            got: key.len(),
        }
        .into());
    }
    Ok(Oracle {
        design: locked,
        key: key.0,
        queries: AtomicUsize::new(0),
    })
}

fn check_interface(locked: &Netlist, oracle: &Oracle) -> Result<(), AttackError> {
    for (what, o, l) in [
        ("inputs", oracle.num_inputs(), locked.primary_inputs().len()),
        ("outputs", oracle.num_outputs(), locked.outputs().len()),
    ] {
        if o != l {
            return Err(AttackError::InterfaceMismatch {
                what,
                oracle: o,
                locked: l,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DipRecord {
    pub input: Vec<bool>,
    pub oracle_output: Vec<bool>,
    /// The two keys the solver found disagreeing on `input`.
    pub key_a: Vec<bool>,
    pub key_b: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatAttackStats {
    pub iterations: usize,
    pub dips: Vec<DipRecord>,
    pub recovered_key: KeyVector,
    pub oracle_queries: usize,
}

impl fmt::Display for SatAttackStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "iterations: {}", self.iterations)?;
        for (i, d) in self.dips.iter().enumerate() {
            writeln!(
                f,
                "dip {}: input {} oracle {}",
                i + 1,
                bits_to_string(&d.input),
                bits_to_string(&d.oracle_output)
            )?;
        }
        writeln!(f, "key: {}", self.recovered_key)?;
        writeln!(f, "oracle queries: {}", self.oracle_queries)
    }
}

/// Iterates miter solving until no distinguishing input remains, then reads
/// a key consistent with every oracle observation.
pub fn sat_attack(locked: &Netlist, oracle: &Oracle) -> Result<SatAttackStats, AttackError> {
    check_interface(locked, oracle)?;
    let start_queries = oracle.query_count();
    if locked.key_inputs().is_empty() {
        return Ok(SatAttackStats {
            iterations: 0,
            dips: Vec::new(),
            recovered_key: KeyVector::default(),
            oracle_queries: 0,
        });
    }
    let bound = 1u128 << locked.primary_inputs().len().min(127);
    let mut bundle = build_miter(locked)?;
    let mut dips: Vec<DipRecord> = Vec::new();
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    loop {
        match dpll_solve(&bundle.with_difference()) {
            SolveResult::Sat(m) => {
                let input = m.values(&bundle.copy1.inputs);
                if !seen.insert(input.clone()) || dips.len() as u128 >= bound {
                    return Err(AttackError::Internal(format!(
                        "distinguishing input {} repeated",
                        bits_to_string(&input)
                    )));
                }
                let oracle_output = oracle.query(&input)?;
                constrain_io(&mut bundle, &input, &oracle_output)?;
                dips.push(DipRecord {
                    input,
                    oracle_output,
                    key_a: m.values(&bundle.copy1.keys),
                    key_b: m.values(&bundle.copy2.keys),
                });
            }
            SolveResult::Unsat => break,
        }
    }
    let SolveResult::Sat(m) = dpll_solve(&bundle.with_agreement()) else {
        return Err(AttackError::Internal("no key matches the oracle observations".into()));
    };
    Ok(SatAttackStats {
        iterations: dips.len(),
        dips,
        recovered_key: KeyVector(m.values(&bundle.copy1.keys)),
        oracle_queries: oracle.query_count() - start_queries,
    })
}

/// Key bits recovered by sensitization; `None` marks bits that no input
/// isolates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensitizationResult {
    pub bits: Vec<Option<bool>>,
    /// Input vector used for each resolved bit.
    pub vectors: Vec<Option<Vec<bool>>>,
    pub oracle_queries: usize,
}

impl SensitizationResult {
    pub fn resolved(&self) -> usize {
        self.bits.iter().filter(|b| b.is_some()).count()
    }

    /// Bits as text, with `x` for unknown.
    pub fn key_pattern(&self) -> String {
        self.bits
            .iter()
            .map(|b| match b {
                Some(true) => '1',
                Some(false) => '0',
                None => 'x',
            })
            .collect()
    }
}

impl fmt::Display for SensitizationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (b, v)) in self.bits.iter().zip(&self.vectors).enumerate() {
            match (b, v) {
                (Some(b), Some(v)) => writeln!(f, "key {i}: {} via input {}", u8::from(*b), bits_to_string(v))?,
                _ => writeln!(f, "key {i}: unknown")?,
            }
        }
        writeln!(f, "key: {}", self.key_pattern())?;
        writeln!(f, "oracle queries: {}", self.oracle_queries)
    }
}

/// Output `j` and value `c` such that output `j` equals `c XOR k_bit` for
/// every setting of the other key bits.
fn isolating_output(locked: &Netlist, input: &[bool], bit: usize) -> Result<Option<(usize, bool)>, AttackError> {
    let k = locked.key_inputs().len();
    let mut candidates: Option<Vec<Option<bool>>> = None;
    for rest in 0..1u64 << (k - 1) {
        let others = index_to_bits(rest, k - 1);
        let with = |v: bool| {
            let mut key = others.clone();
            key.insert(bit, v);
            locked.evaluate(input, &key)
        };
        let (zero, one) = (with(false)?, with(true)?);
        let cand = candidates.get_or_insert_with(|| zero.iter().map(|&z| Some(z)).collect());
        for (j, c) in cand.iter_mut().enumerate() {
            if *c != Some(zero[j]) || zero[j] == one[j] {
                *c = None;
            }
        }
        if cand.iter().all(Option::is_none) {
            return Ok(None);
        }
    }
    Ok(candidates.and_then(|c| c.iter().enumerate().find_map(|(j, v)| v.map(|v| (j, v)))))
}

/// Resolves each key bit independently by finding an input that propagates
/// it alone to an output and reading that output from the oracle.
/// Work grows as 2^inputs · 2^keys.
pub fn sensitization_attack(locked: &Netlist, oracle: &Oracle, input_limit: usize) -> Result<SensitizationResult, AttackError> {
    check_interface(locked, oracle)?;
    let n = locked.primary_inputs().len();
    if n > input_limit {
        return Err(AttackError::TooManyInputs { limit: input_limit, got: n });
    }
    let k = locked.key_inputs().len();
    let start_queries = oracle.query_count();
    let mut responses: HashMap<Vec<bool>, Vec<bool>> = HashMap::new();
    let mut bits = vec![None; k];
    let mut vectors = vec![None; k];
    for bit in 0..k {
        for row in 0..1u64 << n {
            let input = index_to_bits(row, n);
            let Some((j, c)) = isolating_output(locked, &input, bit)? else {
                continue;
            };
            let observed = match responses.get(&input) {
                Some(o) => o.clone(),
                None => {
                    let o = oracle.query(&input)?;
                    responses.insert(input.clone(), o.clone());
                    o
                }
            };
            bits[bit] = Some(observed[j] != c);
            vectors[bit] = Some(input);
            break;
        }
    }
    Ok(SensitizationResult {
        bits,
        vectors,
        oracle_queries: oracle.query_count() - start_queries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locking::apply_key;
    use crate::netlist::{equivalent_exhaustive, parse_bench};

    const FIG4A: &str = include_str!("../assets/fig4a.bench");
    const FIG4B: &str = include_str!("../assets/fig4b.bench");
    const FIG6: &str = include_str!("../assets/fig6.bench");

    fn majority(a: bool, b: bool, c: bool) -> bool {
        (a && b) || (b && c) || (a && c)
    }

    #[test]
    fn oracle_counts_queries() {
        let o = make_oracle_locked(parse_bench(FIG6).unwrap(), KeyVector::parse("101").unwrap()).unwrap();
        assert_eq!(o.query(&[true, false, true]).unwrap(), vec![true]);
        assert_eq!(o.query(&[false, true, true]).unwrap(), vec![true]);
        for row in 0..8 {
            let v = index_to_bits(row, 3);
            assert_eq!(o.query(&v).unwrap(), vec![majority(v[0], v[1], v[2])]);
        }
        assert_eq!(o.query_count(), 10);
        assert!(o.query(&[true]).is_err());
        assert_eq!(o.query_count(), 10);
    }

    #[test]
    fn oracle_rejects_wrong_key_length() {
        assert!(make_oracle_locked(parse_bench(FIG6).unwrap(), KeyVector::parse("10").unwrap()).is_err());
        assert!(make_oracle(parse_bench(FIG6).unwrap()).is_err());
    }

    #[test]
    fn sat_attack_on_fig6() {
        let locked = parse_bench(FIG6).unwrap();
        let oracle = make_oracle_locked(locked.clone(), KeyVector::parse("101").unwrap()).unwrap();
        let stats = sat_attack(&locked, &oracle).unwrap();
        assert!(stats.iterations <= 8);
        assert_eq!(stats.iterations, stats.dips.len());
        assert_eq!(stats.oracle_queries, stats.iterations);
        let unlocked = apply_key(&locked, &stats.recovered_key).unwrap();
        for row in 0..8 {
            let v = index_to_bits(row, 3);
            assert_eq!(unlocked.evaluate(&v, &[]).unwrap(), vec![majority(v[0], v[1], v[2])]);
        }
        for d in &stats.dips {
            assert_ne!(
                locked.evaluate(&d.input, &d.key_a).unwrap(),
                locked.evaluate(&d.input, &d.key_b).unwrap()
            );
        }
        let report = stats.to_string();
        assert!(report.contains(&format!("key: {}", stats.recovered_key)));
    }

    #[test]
    fn sat_attack_without_keys_is_trivial() {
        let n = parse_bench(FIG4A).unwrap();
        let oracle = make_oracle(n.clone()).unwrap();
        let stats = sat_attack(&n, &oracle).unwrap();
        assert_eq!(stats.iterations, 0);
        assert!(stats.recovered_key.is_empty());
        assert_eq!(oracle.query_count(), 0);
    }

    #[test]
    fn sat_attack_checks_interface() {
        let oracle = make_oracle(parse_bench("INPUT(a)\nOUTPUT(a)\n").unwrap()).unwrap();
        assert!(matches!(
            sat_attack(&parse_bench(FIG4B).unwrap(), &oracle),
            Err(AttackError::InterfaceMismatch { what: "inputs", .. })
        ));
    }

    #[test]
    fn sensitization_of_single_key() {
        let locked = parse_bench(FIG4B).unwrap();
        let oracle = make_oracle(parse_bench(FIG4A).unwrap()).unwrap();
        let r = sensitization_attack(&locked, &oracle, 16).unwrap();
        assert_eq!(r.bits, vec![Some(false)]);
        assert_eq!(r.vectors[0], Some(vec![false, false, false]));
        assert_eq!(r.oracle_queries, 1);
        assert!(equivalent_exhaustive(
            &parse_bench(FIG4A).unwrap(),
            &locked,
            None,
            Some(&KeyVector(vec![false]))
        )
        .unwrap());
    }

    #[test]
    fn sensitizing_vectors_need_c_low() {
        // c = 0 opens the OR gate; a = 0 or b = 0 passes the key straight
        // through, a = b = 1 passes it inverted.
        let locked = parse_bench(FIG4B).unwrap();
        let found: Vec<(u64, bool)> = (0..8)
            .filter_map(|r| isolating_output(&locked, &index_to_bits(r, 3), 0).unwrap().map(|(_, c)| (r, c)))
            .collect();
        assert_eq!(found, vec![(0b000, false), (0b010, false), (0b100, false), (0b110, true)]);
    }

    #[test]
    fn interlocked_keys_stay_unknown() {
        let locked = parse_bench("INPUT(w)\nINPUT(key0)\nINPUT(key1)\nOUTPUT(y)\nt = XOR(key1, w)\ny = XOR(key0, t)\n").unwrap();
        let oracle = make_oracle_locked(locked.clone(), KeyVector::parse("10").unwrap()).unwrap();
        let r = sensitization_attack(&locked, &oracle, 16).unwrap();
        assert_eq!(r.key_pattern(), "xx");
        assert_eq!(r.oracle_queries, 0);
    }

    #[test]
    fn sensitization_enforces_limit() {
        let locked = parse_bench(FIG4B).unwrap();
        let oracle = make_oracle(parse_bench(FIG4A).unwrap()).unwrap();
        assert_eq!(
            sensitization_attack(&locked, &oracle, 2),
            Err(AttackError::TooManyInputs { limit: 2, got: 3 })
        );
    }
}
