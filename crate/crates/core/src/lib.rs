// SPDX-License-Identifier: Apache-2.0

//! Hardware-security attack toolkit.
//!
//! Two case studies live here:
//!
//! * [`emulator`] models an iterative DES core with a scrambled scan chain
//!   and [`scan_attack`] extracts its key through that chain.
//! * [`netlist`], [`locking`], [`cnf`] and [`attacks`] cover gate-level
//!   logic locking and the oracle-guided SAT and sensitization attacks
//!   against it.

pub mod des;
pub mod emulator;
pub mod prng;
pub mod scan_attack;
pub mod netlist;
pub mod locking;
pub mod cnf;
pub mod attacks;
