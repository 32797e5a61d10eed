// SPDX-License-Identifier: Apache-2.0

use super::{CnfError, CnfFormula, Lit, Var};
use crate::netlist::{GateKind, KeyVector, Netlist, NetlistError};

/// Associative binary operators that n-ary gates are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Op {
    And,
    Or,
    Xor,
}

/// Clauses for `out ≡ a op b`.
fn encode_binary(f: &mut CnfFormula, op: Op, out: Lit, a: Lit, b: Lit) {
    match op {
        Op::And => {
            f.add_clause([!out, a]);
            f.add_clause([!out, b]);
            f.add_clause([out, !a, !b]);
        }
        Op::Or => {
            f.add_clause([out, !a]);
            f.add_clause([out, !b]);
            f.add_clause([!out, a, b]);
        }
        Op::Xor => {
            f.add_clause([!out, a, b]);
            f.add_clause([!out, !a, !b]);
            f.add_clause([out, !a, b]);
            f.add_clause([out, a, !b]);
        }
    }
}

pub(crate) fn encode_equiv(f: &mut CnfFormula, out: Lit, a: Lit) {
    f.add_clause([!out, a]);
    f.add_clause([out, !a]);
}

/// `out ≡ op(ins)`, splitting wide gates into a balanced tree with fresh
/// auxiliary variables.
pub(crate) fn encode_nary(f: &mut CnfFormula, op: Op, out: Lit, ins: &[Lit]) {
    match ins {
        [] => f.add_unit(if op == Op::And { out } else { !out }),
        [a] => encode_equiv(f, out, *a),
        [a, b] => encode_binary(f, op, out, *a, *b),
        _ => {
            let (left, right) = ins.split_at(ins.len() / 2);
            let mut half = |part: &[Lit]| -> Lit {
                if let [single] = part {
                    return *single;
                }
                let aux = f.new_var().pos();
                encode_nary(f, op, aux, part);
                aux
            };
            let l = half(left);
            let r = half(right);
            encode_binary(f, op, out, l, r);
        }
    }
}

fn encode_gate(f: &mut CnfFormula, kind: GateKind, out: Var, ins: &[Lit]) {
    let o = out.pos();
    match kind {
        GateKind::And => encode_nary(f, Op::And, o, ins),
        GateKind::Nand => encode_nary(f, Op::And, !o, ins),
        GateKind::Or => encode_nary(f, Op::Or, o, ins),
        GateKind::Nor => encode_nary(f, Op::Or, !o, ins),
        GateKind::Xor => encode_nary(f, Op::Xor, o, ins),
        GateKind::Xnor => encode_nary(f, Op::Xor, !o, ins),
        GateKind::Buf => encode_equiv(f, o, ins[0]),
        GateKind::Not => encode_equiv(f, !o, ins[0]),
        GateKind::Const0 => f.add_unit(!o),
        GateKind::Const1 => f.add_unit(o),
    }
}

/// Variables of one circuit copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitBinding {
    /// Indexed by `NetId`.
    pub nets: Vec<Var>,
    pub inputs: Vec<Var>,
    pub keys: Vec<Var>,
    pub outputs: Vec<Var>,
}

fn reuse_or_fresh(f: &mut CnfFormula, given: Option<&[Var]>, n: usize, what: &'static str) -> Result<Vec<Var>, CnfError> {
    match given {
        Some(vars) if vars.len() != n => Err(CnfError::Width {
            what,
            expected: n,
            got: vars.len(),
        }),
        Some(vars) => Ok(vars.to_vec()),
        None => Ok(f.new_vars(n)),
    }
}

/// Appends a copy of `n` to `f`. Input and key variables are reused when
/// given and allocated fresh otherwise; gate outputs are always fresh.
pub fn encode_circuit(
    f: &mut CnfFormula,
    n: &Netlist,
    shared_inputs: Option<&[Var]>,
    shared_keys: Option<&[Var]>,
) -> Result<CircuitBinding, CnfError> {
    let inputs = reuse_or_fresh(f, shared_inputs, n.primary_inputs().len(), "input variable map")?;
    let keys = reuse_or_fresh(f, shared_keys, n.key_inputs().len(), "key variable map")?;
    let mut nets: Vec<Option<Var>> = vec![None; n.num_nets()];
    for (&net, &v) in n.primary_inputs().iter().zip(&inputs).chain(n.key_inputs().iter().zip(&keys)) {
        nets[net.0] = Some(v);
    }
    for g in n.gates() {
        nets[g.output.0] = Some(f.new_var());
    }
    let nets: Vec<Var> = nets.into_iter().map(|v| v.expect("validated netlists drive every net")).collect();
    for g in n.gates() {
        let ins: Vec<Lit> = g.inputs.iter().map(|i| nets[i.0].pos()).collect();
        encode_gate(f, g.kind, nets[g.output.0], &ins);
    }
    let outputs = n.outputs().iter().map(|o| nets[o.0]).collect();
    Ok(CircuitBinding {
        nets,
        inputs,
        keys,
        outputs,
    })
}

/// `diff ≡ OR_j (a_j XOR b_j)`.
fn encode_difference(f: &mut CnfFormula, a: &[Var], b: &[Var]) -> Var {
    let xors: Vec<Lit> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = f.new_var();
            encode_binary(f, Op::Xor, d.pos(), x.pos(), y.pos());
            d.pos()
        })
        .collect();
    let diff = f.new_var();
    encode_nary(f, Op::Or, diff.pos(), &xors);
    diff
}

/// Two copies of a locked circuit with shared inputs and separate keys.
/// `formula` holds the copies and any IO constraints but leaves `diff`
/// free; [`with_difference`](Self::with_difference) and
/// [`with_agreement`](Self::with_agreement) pin it.
#[derive(Debug, Clone)]
pub struct MiterBundle {
    pub formula: CnfFormula,
    pub circuit: Netlist,
    pub copy1: CircuitBinding,
    pub copy2: CircuitBinding,
    pub diff: Var,
}

impl MiterBundle {
    /// Some output pair differs.
    pub fn with_difference(&self) -> CnfFormula {
        let mut f = self.formula.clone();
        f.add_unit(self.diff.pos());
        f
    }

    /// Every output pair agrees.
    pub fn with_agreement(&self) -> CnfFormula {
        let mut f = self.formula.clone();
        f.add_unit(self.diff.neg());
        f
    }
}

pub fn build_miter(locked: &Netlist) -> Result<MiterBundle, CnfError> {
    if locked.key_inputs().is_empty() {
        return Err(CnfError::NoKeyInputs);
    }
    let mut f = CnfFormula::new();
    let copy1 = encode_circuit(&mut f, locked, None, None)?;
    let copy2 = encode_circuit(&mut f, locked, Some(&copy1.inputs), None)?;
    let diff = encode_difference(&mut f, &copy1.outputs, &copy2.outputs);
    Ok(MiterBundle {
        formula: f,
        circuit: locked.clone(),
        copy1,
        copy2,
        diff,
    })
}

/// Adds one copy per key set with inputs fixed to `dip` and outputs fixed to
/// `output`, so both keys must reproduce that observation.
pub fn constrain_io(bundle: &mut MiterBundle, dip: &[bool], output: &[bool]) -> Result<(), CnfError> {
    let n = &bundle.circuit;
    for (what, expected, got) in [
        ("input pattern", n.primary_inputs().len(), dip.len()),
        ("output pattern", n.outputs().len(), output.len()),
    ] {
        if expected != got {
            return Err(CnfError::Width { what, expected, got });
        }
    }
    for keys in [bundle.copy1.keys.clone(), bundle.copy2.keys.clone()] {
        let f = &mut bundle.formula;
        let copy = encode_circuit(f, n, None, Some(&keys))?;
        for (&v, &bit) in copy.inputs.iter().zip(dip).chain(copy.outputs.iter().zip(output)) {
            f.add_unit(v.lit(bit));
        }
    }
    Ok(())
}

/// Formula that is SAT exactly when `a` under `key_a` and `b` under `key_b`
/// disagree on some input. A missing key means the netlist must be unkeyed.
pub fn build_equivalence_miter(
    a: &Netlist,
    b: &Netlist,
    key_a: Option<&KeyVector>,
    key_b: Option<&KeyVector>,
) -> Result<(CnfFormula, CircuitBinding, CircuitBinding), CnfError> {
    if a.primary_inputs().len() != b.primary_inputs().len() || a.outputs().len() != b.outputs().len() {
        return Err(NetlistError::InterfaceMismatch(format!(
            "{}/{} vs {}/{} inputs/outputs",
            a.primary_inputs().len(),
            a.outputs().len(),
            b.primary_inputs().len(),
            b.outputs().len()
        ))
        .into());
    }
    let mut f = CnfFormula::new();
    let ca = encode_circuit(&mut f, a, None, None)?;
    let cb = encode_circuit(&mut f, b, Some(&ca.inputs), None)?;
    for (n, c, key) in [(a, &ca, key_a), (b, &cb, key_b)] {
        let bits = key.map(|k| k.bits()).unwrap_or(&[]);
        if bits.len() != n.key_inputs().len() {
            return Err(NetlistError::KeyLength {
                expected: n.key_inputs().len(),
                got: bits.len(),
            }
            .into());
        }
        for (&v, &bit) in c.keys.iter().zip(bits) {
            f.add_unit(v.lit(bit));
        }
    }
    let diff = encode_difference(&mut f, &ca.outputs, &cb.outputs);
    f.add_unit(diff.pos());
    Ok((f, ca, cb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{dpll_solve, Assignment, SolveResult};
    use crate::netlist::{index_to_bits, parse_bench};

    const FIG6: &str = include_str!("../../assets/fig6.bench");

    /// Every total assignment of the formula, by brute force.
    fn models(f: &CnfFormula) -> Vec<Assignment> {
        let n = f.num_vars() as usize;
        assert!(n <= 22);
        (0..1u64 << n)
            .map(|m| Assignment::from_values((0..n).map(|i| m >> i & 1 == 1).collect()))
            .filter(|a| f.is_satisfied_by(a))
            .collect()
    }

    #[test]
    fn buffer_is_two_clauses() {
        let n = parse_bench("INPUT(a)\nOUTPUT(y)\ny = BUF(a)\n").unwrap();
        let mut f = CnfFormula::new();
        encode_circuit(&mut f, &n, None, None).unwrap();
        assert_eq!(f.clauses().len(), 2);
        assert_eq!(f.num_vars(), 2);
    }

    #[test]
    fn every_kind_matches_its_truth_table() {
        for kind in GateKind::ALL {
            let arities: &[usize] = match kind {
                GateKind::Not | GateKind::Buf => &[1],
                GateKind::Const0 | GateKind::Const1 => &[0],
                _ => &[2, 3, 4, 5],
            };
            for &k in arities {
                let mut f = CnfFormula::new();
                let ins = f.new_vars(k);
                let out = f.new_var();
                let lits: Vec<Lit> = ins.iter().map(|v| v.pos()).collect();
                encode_gate(&mut f, kind, out, &lits);
                let mut seen = 0;
                for m in models(&f) {
                    let vals = m.values(&ins);
                    assert_eq!(m.value(out), kind.eval(vals.iter().copied()), "{kind} arity {k}");
                    seen += 1;
                }
                // Aux variables are functionally determined, so one model per input row.
                assert_eq!(seen, 1 << k, "{kind} arity {k}");
            }
        }
    }

    #[test]
    fn projected_models_of_fig6_match_simulation() {
        let n = parse_bench(FIG6).unwrap();
        let mut f = CnfFormula::new();
        let c = encode_circuit(&mut f, &n, None, None).unwrap();
        let mut rows: Vec<(Vec<bool>, Vec<bool>, Vec<bool>)> = models(&f)
            .iter()
            .map(|m| (m.values(&c.inputs), m.values(&c.keys), m.values(&c.outputs)))
            .collect();
        rows.sort();
        let mut expected = Vec::new();
        for row in 0..64 {
            let bits = index_to_bits(row, 6);
            let out = n.evaluate(&bits[..3], &bits[3..]).unwrap();
            expected.push((bits[..3].to_vec(), bits[3..].to_vec(), out));
        }
        expected.sort();
        assert_eq!(rows, expected);
    }

    #[test]
    fn clause_count_is_linear_in_gates() {
        let chain = |len: usize| {
            let mut text = String::from("INPUT(a)\nINPUT(b)\nOUTPUT(g0)\ng0 = AND(a, b)\n");
            for i in 1..len {
                text.push_str(&format!("g{i} = XOR(g{}, a)\n", i - 1));
            }
            let mut f = CnfFormula::new();
            encode_circuit(&mut f, &parse_bench(&text).unwrap(), None, None).unwrap();
            f.clauses().len()
        };
        assert_eq!(chain(1), 3);
        assert_eq!(chain(11), 3 + 10 * 4);
        assert_eq!(chain(101), 3 + 100 * 4);
    }

    #[test]
    fn miter_requires_keys() {
        let n = parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)\n").unwrap();
        assert!(matches!(build_miter(&n), Err(CnfError::NoKeyInputs)));
    }

    #[test]
    fn fig6_miter_yields_a_distinguishing_input() {
        let n = parse_bench(FIG6).unwrap();
        let m = build_miter(&n).unwrap();
        let SolveResult::Sat(a) = dpll_solve(&m.with_difference()) else {
            panic!("fig6 miter must be SAT");
        };
        assert_eq!(m.copy1.inputs, m.copy2.inputs);
        assert!(m.copy1.keys.iter().all(|k| !m.copy2.keys.contains(k)));
        let dip = a.values(&m.copy1.inputs);
        let o1 = n.evaluate(&dip, &a.values(&m.copy1.keys)).unwrap();
        let o2 = n.evaluate(&dip, &a.values(&m.copy2.keys)).unwrap();
        assert_ne!(o1, o2);
    }

    #[test]
    fn shared_key_miter_is_unsat() {
        let n = parse_bench(FIG6).unwrap();
        let mut f = CnfFormula::new();
        let c1 = encode_circuit(&mut f, &n, None, None).unwrap();
        let c2 = encode_circuit(&mut f, &n, Some(&c1.inputs), Some(&c1.keys)).unwrap();
        let diff = encode_difference(&mut f, &c1.outputs, &c2.outputs);
        f.add_unit(diff.pos());
        assert_eq!(dpll_solve(&f), SolveResult::Unsat);
    }

    #[test]
    fn constraining_excludes_inconsistent_keys() {
        let n = parse_bench(FIG6).unwrap();
        let mut m = build_miter(&n).unwrap();
        constrain_io(&mut m, &[true, false, true], &[true]).unwrap();
        let once = dpll_solve(&m.with_difference()).is_sat();
        // Any K1 that survives must give output 1 on (1,0,1).
        for key in 0..8u64 {
            let bits = index_to_bits(key, 3);
            let mut f = m.formula.clone();
            for (&v, &b) in m.copy1.keys.iter().zip(&bits) {
                f.add_unit(v.lit(b));
            }
            let allowed = n.evaluate(&[true, false, true], &bits).unwrap() == [true];
            assert_eq!(dpll_solve(&f).is_sat(), allowed, "key {key:03b}");
        }
        constrain_io(&mut m, &[true, false, true], &[true]).unwrap();
        assert_eq!(dpll_solve(&m.with_difference()).is_sat(), once);
        assert!(matches!(
            constrain_io(&mut m, &[true], &[true]),
            Err(CnfError::Width { .. })
        ));
    }
}
