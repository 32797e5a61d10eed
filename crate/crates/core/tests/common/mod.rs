// SPDX-License-Identifier: Apache-2.0

//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use scanlock_core::cnf::{dpll_solve, encode_circuit, CnfFormula, Lit, SolveResult};
use scanlock_core::netlist::{index_to_bits, Netlist};
use scanlock_core::prng::SplitMix64;

/// Clauses as (positive, negative) bit masks over at most 32 variables.
fn masks(clauses: &[Vec<i32>]) -> Vec<(u32, u32)> {
    clauses
        .iter()
        .map(|c| {
            c.iter().fold((0, 0), |(p, n), &l| {
                let bit = 1u32 << (l.unsigned_abs() - 1);
                if l > 0 {
                    (p | bit, n)
                } else {
                    (p, n | bit)
                }
            })
        })
        .collect()
}

/// Tries every assignment.
pub fn brute_force_sat(num_vars: u32, clauses: &[Vec<i32>]) -> bool {
    let m = masks(clauses);
    (0..1u64 << num_vars).any(|a| {
        let a = a as u32;
        m.iter().all(|&(p, n)| a & p != 0 || !a & n != 0)
    })
}

pub fn to_formula(n: u32, clauses: &[Vec<i32>]) -> CnfFormula {
    let mut f = CnfFormula::with_vars(n);
    for c in clauses {
        f.add_clause(c.iter().map(|&l| Lit::from_dimacs(l).unwrap()));
    }
    f
}

/// 1..=20 variables, up to 4.5 clauses per variable of width 1..=4.
pub fn seeded_formula(rng: &mut SplitMix64) -> (u32, Vec<Vec<i32>>) {
    let n = 1 + rng.below(20) as u32;
    let max_clauses = (n as u64 * 9 / 2).max(2);
    let m = 1 + rng.below(max_clauses);
    let clauses = (0..m)
        .map(|_| {
            let width = 1 + rng.below(4);
            (0..width)
                .map(|_| {
                    let v = 1 + rng.below(n as u64) as i32;
                    if rng.below(2) == 0 {
                        v
                    } else {
                        -v
                    }
                })
                .collect()
        })
        .collect();
    (n, clauses)
}

/// The encoded relation projected onto (inputs, keys, outputs) equals
/// simulation: every (input, key) row is SAT with the simulated outputs and
/// UNSAT with any other output vector.
pub fn tseytin_matches_simulation(n: &Netlist) -> Result<(), String> {
    let mut base = CnfFormula::new();
    let c = encode_circuit(&mut base, n, None, None).map_err(|e| e.to_string())?;
    let (ni, nk) = (c.inputs.len(), c.keys.len());
    for row in 0..1u64 << (ni + nk) {
        let bits = index_to_bits(row, ni + nk);
        let expected = n.evaluate(&bits[..ni], &bits[ni..]).map_err(|e| e.to_string())?;
        let mut f = base.clone();
        for (&v, &b) in c.inputs.iter().chain(&c.keys).zip(&bits) {
            f.add_unit(v.lit(b));
        }
        let SolveResult::Sat(m) = dpll_solve(&f) else {
            return Err(format!("row {row} unsatisfiable"));
        };
        if m.values(&c.outputs) != expected {
            return Err(format!("row {row}: solver outputs differ from simulation"));
        }
        if !c.outputs.is_empty() {
            f.add_clause(c.outputs.iter().zip(&expected).map(|(&v, &b)| v.lit(!b)));
            if dpll_solve(&f).is_sat() {
                return Err(format!("row {row} admits a wrong output"));
            }
        }
    }
    Ok(())
}
