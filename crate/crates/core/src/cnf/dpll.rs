// SPDX-License-Identifier: Apache-2.0

//! DPLL with two watched literals and chronological backtracking.
//! Branching always picks the lowest unassigned variable, true first, so
//! equal formulas give equal models.

use super::{Assignment, CnfFormula, Lit};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Assignment),
    Unsat,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn model(&self) -> Option<&Assignment> {
        match self {
            SolveResult::Sat(a) => Some(a),
            SolveResult::Unsat => None,
        }
    }
}

const UNSET: u8 = 2;

fn value_of(values: &[u8], l: Lit) -> u8 {
    match values[l.var().index()] {
        UNSET => UNSET,
        v => u8::from((v == 1) == l.is_positive()),
    }
}

struct Solver {
    clauses: Vec<Vec<Lit>>,
    /// Clause indices watching each literal code.
    watches: Vec<Vec<usize>>,
    /// 0 = false, 1 = true, UNSET.
    values: Vec<u8>,
    trail: Vec<Lit>,
    qhead: usize,
    /// (trail length before the decision, decision literal, already flipped)
    decisions: Vec<(usize, Lit, bool)>,
    /// Every variable below this index is assigned.
    cursor: usize,
}

impl Solver {
    fn lit_value(&self, l: Lit) -> u8 {
        value_of(&self.values, l)
    }

    fn assign(&mut self, l: Lit) {
        self.values[l.var().index()] = u8::from(l.is_positive());
        self.trail.push(l);
    }

    /// Returns false on conflict.
    fn propagate(&mut self) -> bool {
        let Solver {
            clauses,
            watches,
            values,
            trail,
            qhead,
            ..
        } = self;
        while *qhead < trail.len() {
            let falsified = !trail[*qhead];
            *qhead += 1;
            let mut watching = std::mem::take(&mut watches[falsified.code()]);
            let mut i = 0;
            let mut ok = true;
            while i < watching.len() {
                let ci = watching[i];
                let clause = &mut clauses[ci];
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                let other = clause[0];
                if value_of(values, other) == 1 {
                    i += 1;
                    continue;
                }
                if let Some(k) = (2..clause.len()).find(|&k| value_of(values, clause[k]) != 0) {
                    clause.swap(1, k);
                    watches[clause[1].code()].push(ci);
                    watching.swap_remove(i);
                    continue;
                }
                i += 1;
                if value_of(values, other) == UNSET {
                    values[other.var().index()] = u8::from(other.is_positive());
                    trail.push(other);
                } else {
                    ok = false;
                    break;
                }
            }
            watches[falsified.code()] = watching;
            if !ok {
                return false;
            }
        }
        true
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let l = self.trail.pop().unwrap();
            let idx = l.var().index();
            self.values[idx] = UNSET;
            self.cursor = self.cursor.min(idx);
        }
        self.qhead = len;
    }

    /// Flips the most recent unflipped decision. False when none is left.
    fn backtrack(&mut self) -> bool {
        while let Some((len, lit, flipped)) = self.decisions.pop() {
            self.undo_to(len);
            if !flipped {
                self.decisions.push((len, !lit, true));
                self.assign(!lit);
                return true;
            }
        }
        false
    }
}

pub fn dpll_solve(f: &CnfFormula) -> SolveResult {
    let n = f.num_vars() as usize;
    let mut s = Solver {
        clauses: Vec::new(),
        watches: vec![Vec::new(); 2 * n],
        values: vec![UNSET; n],
        trail: Vec::new(),
        qhead: 0,
        decisions: Vec::new(),
        cursor: 0,
    };
    let mut units = Vec::new();
    for c in f.clauses() {
        let mut c = c.clone();
        c.sort();
        c.dedup();
        if c.iter().any(|&l| c.contains(&!l)) {
            continue;
        }
        match c.len() {
            0 => return SolveResult::Unsat,
            1 => units.push(c[0]),
            _ => {
                s.watches[c[0].code()].push(s.clauses.len());
                s.watches[c[1].code()].push(s.clauses.len());
                s.clauses.push(c);
            }
        }
    }
    for l in units {
        match s.lit_value(l) {
            0 => return SolveResult::Unsat,
            1 => {}
            _ => s.assign(l),
        }
    }

    loop {
        if !s.propagate() {
            if !s.backtrack() {
                return SolveResult::Unsat;
            }
            continue;
        }
        while s.cursor < n && s.values[s.cursor] != UNSET {
            s.cursor += 1;
        }
        if s.cursor == n {
            return SolveResult::Sat(Assignment::from_values(s.values.iter().map(|&v| v == 1).collect()));
        }
        let lit = super::Var::new(s.cursor as u32 + 1).pos();
        s.decisions.push((s.trail.len(), lit, false));
        s.assign(lit);
    }
}
