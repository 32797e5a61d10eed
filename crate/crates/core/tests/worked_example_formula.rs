// SPDX-License-Identifier: Apache-2.0

//! The hand-written three-iteration formula for the locked majority circuit.
//! The transcription keeps a slip in the second copy of each iteration, which
//! reads `u5` where `w5` is meant; both spellings are exercised.

use scanlock_core::cnf::prop::{parse_expr, to_cnf, PropCnf};
use scanlock_core::cnf::{dpll_solve, SolveResult};

const FORMULA: &str = include_str!("data/worked_example_formula.txt");
const DIFFERENCE: &str = "(y + yx) &";

fn without_difference(text: &str) -> String {
    assert_eq!(text.matches(DIFFERENCE).count(), 1);
    text.replace(DIFFERENCE, "")
}

fn corrected(text: &str) -> String {
    let mut t = text.to_string();
    for (u, w) in [("u5&w4", "w5&w4"), ("uu5&ww4", "ww5&ww4"), ("uuu5&www4", "www5&www4"), ("uuuu5&wwww4", "wwww5&wwww4")] {
        assert!(t.contains(u));
        t = t.replace(&format!("~({u})"), &format!("~({w})"));
    }
    t
}

fn key(p: &PropCnf, model: &scanlock_core::cnf::Assignment, suffix: &str) -> [bool; 3] {
    ["k1", "k2", "k3"].map(|k| model.value(p.var(&format!("{k}{suffix}")).unwrap()))
}

/// Is the formula still satisfiable once key set `suffix` differs from `bits`?
fn other_key_possible(p: &PropCnf, suffix: &str, bits: [bool; 3]) -> bool {
    let mut f = p.formula.clone();
    let lits = ["k1", "k2", "k3"].iter().zip(bits).map(|(k, b)| p.var(&format!("{k}{suffix}")).unwrap().lit(!b));
    f.add_clause(lits);
    dpll_solve(&f).is_sat()
}

#[test]
fn with_difference_term_is_unsat() {
    for text in [FORMULA.to_string(), corrected(FORMULA)] {
        let p = to_cnf(&parse_expr(&text).unwrap());
        assert_eq!(dpll_solve(&p.formula), SolveResult::Unsat);
    }
}

#[test]
fn without_difference_term_reveals_the_key() {
    let text = without_difference(FORMULA);
    let expr = parse_expr(&text).unwrap();
    let p = to_cnf(&expr);
    let SolveResult::Sat(model) = dpll_solve(&p.formula) else {
        panic!("formula without the difference term must be SAT");
    };
    let env = |n: &str| model.value(p.var(n).unwrap());
    assert!(expr.eval(&env));
    assert_eq!(key(&p, &model, "a"), [true, false, true]);
    assert!(!other_key_possible(&p, "a", [true, false, true]));
    assert_eq!(key(&p, &model, "b"), [true, false, true]);
    // The `u5` slip leaves k1b unconstrained in the second copy.
    assert!(other_key_possible(&p, "b", key(&p, &model, "b")));
}

#[test]
fn corrected_formula_pins_both_keys() {
    let text = without_difference(&corrected(FORMULA));
    let p = to_cnf(&parse_expr(&text).unwrap());
    let SolveResult::Sat(model) = dpll_solve(&p.formula) else {
        panic!()
    };
    for suffix in ["a", "b"] {
        assert_eq!(key(&p, &model, suffix), [true, false, true]);
        assert!(!other_key_possible(&p, suffix, [true, false, true]));
    }
}
