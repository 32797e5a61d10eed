// SPDX-License-Identifier: Apache-2.0

//! CNF formulas, circuit encoding and a small DPLL solver.

mod dpll;
mod dimacs;
pub mod prop;
mod tseytin;

use std::fmt;
use std::ops::Not;

use thiserror::Error;

use crate::netlist::NetlistError;

pub use dimacs::{parse_dimacs, to_dimacs};
pub use dpll::{dpll_solve, SolveResult};
pub use tseytin::{build_equivalence_miter, build_miter, constrain_io, encode_circuit, CircuitBinding, MiterBundle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("clauses must contain at least one literal")]
    EmptyClause,
    #[error("literal refers to variable {var} but the formula has {num_vars}")]
    UnknownVariable { var: u32, num_vars: u32 },
    #[error("netlist has no key inputs")]
    NoKeyInputs,
    #[error("{what} has {got} bits, expected {expected}")]
    Width {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("DIMACS line {line}: {message}")]
    Dimacs { line: usize, message: String },
    #[error("formula syntax at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// Variable ids start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn new(id: u32) -> Self {
        assert!(id > 0, "variable ids start at 1");
        Var(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn pos(self) -> Lit {
        Lit(self.0 as i32)
    }

    pub fn neg(self) -> Lit {
        Lit(-(self.0 as i32))
    }

    /// Literal that is true when the variable equals `value`.
    pub fn lit(self, value: bool) -> Lit {
        if value {
            self.pos()
        } else {
            self.neg()
        }
    }

    pub(crate) fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Signed variable id; the sign is the polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(i32);

impl Lit {
    pub fn from_dimacs(value: i32) -> Option<Self> {
        (value != 0 && value != i32::MIN).then_some(Lit(value))
    }

    pub fn dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Dense index: 2·(var-1) for the positive literal, +1 for the negative.
    pub(crate) fn code(self) -> usize {
        2 * self.var().index() + usize::from(self.0 < 0)
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type Clause = Vec<Lit>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new() -> Self {
        Self::default()
    }

    /// A formula over `n` variables and no clauses.
    pub fn with_vars(n: u32) -> Self {
        Self {
            num_vars: n,
            clauses: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        Var(self.num_vars)
    }

    pub fn new_vars(&mut self, n: usize) -> Vec<Var> {
        (0..n).map(|_| self.new_var()).collect()
    }

    pub fn try_add_clause(&mut self, clause: impl IntoIterator<Item = Lit>) -> Result<(), CnfError> {
        let clause: Clause = clause.into_iter().collect();
        if clause.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        if let Some(l) = clause.iter().find(|l| l.var().0 > self.num_vars) {
            return Err(CnfError::UnknownVariable {
                var: l.var().0,
                num_vars: self.num_vars,
            });
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// Panics on an empty clause or an unallocated variable; use
    /// [`try_add_clause`](Self::try_add_clause) for untrusted input.
    pub fn add_clause(&mut self, clause: impl IntoIterator<Item = Lit>) {
        self.try_add_clause(clause).expect("invalid clause");
    }

    pub fn add_unit(&mut self, lit: Lit) {
        self.add_clause([lit]);
    }

    /// Does `a` satisfy every clause? Unassigned variables count as false.
    pub fn is_satisfied_by(&self, a: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| a.lit(l)))
    }
}

/// Total map from variables to values, indexed by variable id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn from_values(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn value(&self, v: Var) -> bool {
        self.0.get(v.index()).copied().unwrap_or(false)
    }

    pub fn lit(&self, l: Lit) -> bool {
        self.value(l.var()) == l.is_positive()
    }

    pub fn values(&self, vars: &[Var]) -> Vec<bool> {
        vars.iter().map(|&v| self.value(v)).collect()
    }
}
