// SPDX-License-Identifier: Apache-2.0

//! Combinational gate-level netlists.
//!
//! A [`Netlist`] is built through [`NetlistBuilder`], which checks that every
//! net has exactly one driver, that every referenced net exists, and that the
//! gates form a DAG. A successfully built netlist carries its evaluation
//! order and is immutable afterwards.

mod bench;
pub mod random;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use bench::{parse_bench, parse_bench_with_prefix, serialize_bench, DEFAULT_KEY_PREFIX};

/// Upper bound on primary inputs for exhaustive enumeration.
pub const DEFAULT_INPUT_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Xnor,
    Not,
    Buf,
    /// Constant 0 driver (no inputs).
    Const0,
    /// Constant 1 driver (no inputs).
    Const1,
}

impl GateKind {
    pub const ALL: [GateKind; 10] = [
        GateKind::And,
        GateKind::Nand,
        GateKind::Or,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
        GateKind::Not,
        GateKind::Buf,
        GateKind::Const0,
        GateKind::Const1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Nand => "NAND",
            GateKind::Or => "OR",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Not => "NOT",
            GateKind::Buf => "BUF",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let kind = match name.to_ascii_uppercase().as_str() {
            "AND" => GateKind::And,
            "NAND" => GateKind::Nand,
            "OR" => GateKind::Or,
            "NOR" => GateKind::Nor,
            "XOR" => GateKind::Xor,
            "XNOR" => GateKind::Xnor,
            "NOT" | "INV" => GateKind::Not,
            "BUF" | "BUFF" => GateKind::Buf,
            "CONST0" | "GND" => GateKind::Const0,
            "CONST1" | "VDD" => GateKind::Const1,
            _ => return None,
        };
        Some(kind)
    }

    pub fn arity_ok(self, n: usize) -> bool {
        match self {
            GateKind::Not | GateKind::Buf => n == 1,
            GateKind::Const0 | GateKind::Const1 => n == 0,
            _ => n >= 2,
        }
    }

    /// The gate with its output inverted.
    pub fn negated(self) -> Self {
        match self {
            GateKind::And => GateKind::Nand,
            GateKind::Nand => GateKind::And,
            GateKind::Or => GateKind::Nor,
            GateKind::Nor => GateKind::Or,
            GateKind::Xor => GateKind::Xnor,
            GateKind::Xnor => GateKind::Xor,
            GateKind::Not => GateKind::Buf,
            GateKind::Buf => GateKind::Not,
            GateKind::Const0 => GateKind::Const1,
            GateKind::Const1 => GateKind::Const0,
        }
    }

    pub fn eval(self, inputs: impl IntoIterator<Item = bool>) -> bool {
        let mut it = inputs.into_iter();
        match self {
            GateKind::And => it.all(|b| b),
            GateKind::Nand => !it.all(|b| b),
            GateKind::Or => it.any(|b| b),
            GateKind::Nor => !it.any(|b| b),
            GateKind::Xor => it.fold(false, |acc, b| acc ^ b),
            GateKind::Xnor => !it.fold(false, |acc, b| acc ^ b),
            GateKind::Not => !it.next().expect("NOT needs an input"),
            GateKind::Buf => it.next().expect("BUF needs an input"),
            GateKind::Const0 => false,
            GateKind::Const1 => true,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub output: NetId,
    pub kind: GateKind,
    pub inputs: Vec<NetId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Input(usize),
    Key(usize),
    Gate(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetlistError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown gate kind {kind:?}")]
    UnknownGate { line: usize, kind: String },
    #[error("line {line}: sequential element {kind:?} is not supported")]
    Sequential { line: usize, kind: String },
    #[error("{}{kind} driving {net:?} cannot take {got} input(s)", at(*.line))]
    Arity {
        line: Option<usize>,
        net: String,
        kind: GateKind,
        got: usize,
    },
    #[error("{}net {net:?} is defined more than once", at(*.line))]
    DuplicateDefinition { line: Option<usize>, net: String },
    #[error("{}output {net:?} is declared more than once", at(*.line))]
    DuplicateOutput { line: Option<usize>, net: String },
    #[error("{}net {net:?} is used but never defined", at(*.line))]
    UndefinedNet { line: Option<usize>, net: String },
    #[error("{}combinational cycle through {net:?}", at(*.line))]
    Cycle { line: Option<usize>, net: String },
    #[error("expected {expected} input bits, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("expected {expected} key bits, got {got}")]
    KeyLength { expected: usize, got: usize },
    #[error("{got} primary inputs exceed the exhaustive limit of {limit}")]
    TooManyInputs { limit: usize, got: usize },
    #[error("circuits differ in interface: {0}")]
    InterfaceMismatch(String),
    #[error("invalid bit string {0:?}")]
    BitString(String),
}

fn at(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

/// Ordered key bits, one per key input in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct KeyVector(pub Vec<bool>);

impl KeyVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Parses a string of `0`/`1` characters, first character first.
    pub fn parse(text: &str) -> Result<Self, NetlistError> {
        parse_bits(text).map(Self)
    }
}

impl fmt::Display for KeyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&bits_to_string(&self.0))
    }
}

impl From<Vec<bool>> for KeyVector {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

pub fn parse_bits(text: &str) -> Result<Vec<bool>, NetlistError> {
    text.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(NetlistError::BitString(text.to_string())),
        })
        .collect()
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// The `width` bits of `index`, most significant first.
pub fn index_to_bits(index: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| (index >> (width - 1 - i)) & 1 == 1).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Netlist {
    names: Vec<String>,
    index: HashMap<String, NetId>,
    primary_inputs: Vec<NetId>,
    key_inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    gates: Vec<Gate>,
    drivers: Vec<Option<Driver>>,
    order: Vec<usize>,
}

impl Netlist {
    pub fn empty() -> Self {
        NetlistBuilder::new().build().expect("empty netlist is valid")
    }

    pub fn primary_inputs(&self) -> &[NetId] {
        &self.primary_inputs
    }

    pub fn key_inputs(&self) -> &[NetId] {
        &self.key_inputs
    }

    pub fn outputs(&self) -> &[NetId] {
        &self.outputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_nets(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, net: NetId) -> &str {
        &self.names[net.0]
    }

    pub fn net(&self, name: &str) -> Option<NetId> {
        self.index.get(name).copied()
    }

    pub fn driver(&self, net: NetId) -> Option<Driver> {
        self.drivers[net.0]
    }

    /// Gate indices in a valid evaluation order.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Number of gates reading each net, plus one per output reference.
    pub fn fanout_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.names.len()];
        for g in &self.gates {
            for i in &g.inputs {
                counts[i.0] += 1;
            }
        }
        for o in &self.outputs {
            counts[o.0] += 1;
        }
        counts
    }

    /// Re-opens the netlist for editing.
    pub fn to_builder(&self) -> NetlistBuilder {
        let mut b = NetlistBuilder::new();
        for &n in &self.primary_inputs {
            b.input(self.name(n));
        }
        for &n in &self.key_inputs {
            b.key_input(self.name(n));
        }
        for &n in &self.outputs {
            b.output(self.name(n));
        }
        for g in &self.gates {
            let ins: Vec<&str> = g.inputs.iter().map(|&i| self.name(i)).collect();
            b.gate(self.name(g.output), g.kind, &ins);
        }
        b
    }

    fn check_lengths(&self, inputs: &[bool], key: &[bool]) -> Result<(), NetlistError> {
        if inputs.len() != self.primary_inputs.len() {
            return Err(NetlistError::InputLength {
                expected: self.primary_inputs.len(),
                got: inputs.len(),
            });
        }
        if key.len() != self.key_inputs.len() {
            return Err(NetlistError::KeyLength {
                expected: self.key_inputs.len(),
                got: key.len(),
            });
        }
        Ok(())
    }

    /// Values of every net for one input/key assignment.
    pub fn simulate(&self, inputs: &[bool], key: &[bool]) -> Result<Vec<bool>, NetlistError> {
        self.check_lengths(inputs, key)?;
        let mut values = vec![false; self.names.len()];
        for (&net, &v) in self.primary_inputs.iter().zip(inputs) {
            values[net.0] = v;
        }
        for (&net, &v) in self.key_inputs.iter().zip(key) {
            values[net.0] = v;
        }
        for &gi in &self.order {
            let g = &self.gates[gi];
            values[g.output.0] = g.kind.eval(g.inputs.iter().map(|i| values[i.0]));
        }
        Ok(values)
    }

    pub fn evaluate(&self, inputs: &[bool], key: &[bool]) -> Result<Vec<bool>, NetlistError> {
        let values = self.simulate(inputs, key)?;
        Ok(self.outputs.iter().map(|o| values[o.0]).collect())
    }

    pub fn truth_table(&self, key: Option<&KeyVector>) -> Result<TruthTable, NetlistError> {
        self.truth_table_limited(key, DEFAULT_INPUT_LIMIT)
    }

    pub fn truth_table_limited(&self, key: Option<&KeyVector>, limit: usize) -> Result<TruthTable, NetlistError> {
        let n = self.primary_inputs.len();
        if n > limit {
            return Err(NetlistError::TooManyInputs { limit, got: n });
        }
        let key = key.map(|k| k.bits()).unwrap_or(&[]);
        self.check_lengths(&vec![false; n], key)?;
        let rows = (0..1u64 << n)
            .map(|row| self.evaluate(&index_to_bits(row, n), key))
            .collect::<Result<_, _>>()?;
        Ok(TruthTable {
            num_inputs: n,
            rows,
        })
    }
}

/// Outputs for every primary-input assignment. Row `r` holds the outputs for
/// the inputs spelled by `r` in binary, first input as the MSB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    pub num_inputs: usize,
    pub rows: Vec<Vec<bool>>,
}

impl TruthTable {
    pub fn row_inputs(&self, row: usize) -> Vec<bool> {
        index_to_bits(row as u64, self.num_inputs)
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, outs) in self.rows.iter().enumerate() {
            writeln!(f, "{} | {}", bits_to_string(&self.row_inputs(i)), bits_to_string(outs))?;
        }
        Ok(())
    }
}

/// Exhaustive functional comparison of `a` under `key_a` and `b` under `key_b`.
pub fn equivalent_exhaustive(
    a: &Netlist,
    b: &Netlist,
    key_a: Option<&KeyVector>,
    key_b: Option<&KeyVector>,
) -> Result<bool, NetlistError> {
    equivalent_exhaustive_limited(a, b, key_a, key_b, DEFAULT_INPUT_LIMIT)
}

pub fn equivalent_exhaustive_limited(
    a: &Netlist,
    b: &Netlist,
    key_a: Option<&KeyVector>,
    key_b: Option<&KeyVector>,
    limit: usize,
) -> Result<bool, NetlistError> {
    if a.primary_inputs().len() != b.primary_inputs().len() {
        return Err(NetlistError::InterfaceMismatch(format!(
            "{} vs {} primary inputs",
            a.primary_inputs().len(),
            b.primary_inputs().len()
        )));
    }
    if a.outputs().len() != b.outputs().len() {
        return Err(NetlistError::InterfaceMismatch(format!(
            "{} vs {} outputs",
            a.outputs().len(),
            b.outputs().len()
        )));
    }
    Ok(a.truth_table_limited(key_a, limit)? == b.truth_table_limited(key_b, limit)?)
}

/// Accumulates declarations in any order, then validates them in [`build`](Self::build).
#[derive(Debug, Clone, Default)]
pub struct NetlistBuilder {
    inputs: Vec<(String, Option<usize>)>,
    keys: Vec<(String, Option<usize>)>,
    outputs: Vec<(String, Option<usize>)>,
    gates: Vec<(String, GateKind, Vec<String>, Option<usize>)>,
    line: Option<usize>,
}

impl NetlistBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Source line attached to subsequent declarations (for error messages).
    pub fn at_line(&mut self, line: usize) -> &mut Self {
        self.line = Some(line);
        self
    }

    pub fn input(&mut self, name: &str) -> &mut Self {
        self.inputs.push((name.to_string(), self.line));
        self
    }

    pub fn key_input(&mut self, name: &str) -> &mut Self {
        self.keys.push((name.to_string(), self.line));
        self
    }

    pub fn output(&mut self, name: &str) -> &mut Self {
        self.outputs.push((name.to_string(), self.line));
        self
    }

    pub fn gate(&mut self, output: &str, kind: GateKind, inputs: &[&str]) -> &mut Self {
        self.gates.push((
            output.to_string(),
            kind,
            inputs.iter().map(|s| s.to_string()).collect(),
            self.line,
        ));
        self
    }

    pub fn build(&self) -> Result<Netlist, NetlistError> {
        let mut names = Vec::new();
        let mut index: HashMap<String, NetId> = HashMap::new();
        let mut drivers: Vec<Option<Driver>> = Vec::new();
        let mut def_line: Vec<Option<usize>> = Vec::new();

        let mut intern = |name: &str, names: &mut Vec<String>, drivers: &mut Vec<Option<Driver>>, lines: &mut Vec<Option<usize>>| {
            *index.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                drivers.push(None);
                lines.push(None);
                NetId(names.len() - 1)
            })
        };

        let define = |net: NetId, driver: Driver, line: Option<usize>, names: &[String], drivers: &mut Vec<Option<Driver>>, lines: &mut Vec<Option<usize>>| {
            if drivers[net.0].is_some() {
                return Err(NetlistError::DuplicateDefinition {
                    line,
                    net: names[net.0].clone(),
                });
            }
            drivers[net.0] = Some(driver);
            lines[net.0] = line;
            Ok(())
        };

        let mut primary_inputs = Vec::new();
        for (i, (name, line)) in self.inputs.iter().enumerate() {
            let id = intern(name, &mut names, &mut drivers, &mut def_line);
            define(id, Driver::Input(i), *line, &names, &mut drivers, &mut def_line)?;
            primary_inputs.push(id);
        }
        let mut key_inputs = Vec::new();
        for (i, (name, line)) in self.keys.iter().enumerate() {
            let id = intern(name, &mut names, &mut drivers, &mut def_line);
            define(id, Driver::Key(i), *line, &names, &mut drivers, &mut def_line)?;
            key_inputs.push(id);
        }
        let mut gates = Vec::with_capacity(self.gates.len());
        for (gi, (out, kind, ins, line)) in self.gates.iter().enumerate() {
            if !kind.arity_ok(ins.len()) {
                return Err(NetlistError::Arity {
                    line: *line,
                    net: out.clone(),
                    kind: *kind,
                    got: ins.len(),
                });
            }
            let id = intern(out, &mut names, &mut drivers, &mut def_line);
            define(id, Driver::Gate(gi), *line, &names, &mut drivers, &mut def_line)?;
            let inputs = ins
                .iter()
                .map(|n| intern(n, &mut names, &mut drivers, &mut def_line))
                .collect();
            gates.push(Gate {
                output: id,
                kind: *kind,
                inputs,
            });
        }
        let mut outputs = Vec::new();
        for (name, line) in &self.outputs {
            let id = intern(name, &mut names, &mut drivers, &mut def_line);
            if outputs.contains(&id) {
                return Err(NetlistError::DuplicateOutput {
                    line: *line,
                    net: name.clone(),
                });
            }
            outputs.push(id);
        }

        // Every referenced net needs a driver.
        for (gi, g) in gates.iter().enumerate() {
            if let Some(missing) = g.inputs.iter().find(|i| drivers[i.0].is_none()) {
                return Err(NetlistError::UndefinedNet {
                    line: self.gates[gi].3,
                    net: names[missing.0].clone(),
                });
            }
        }
        for (o, (name, line)) in outputs.iter().zip(&self.outputs) {
            if drivers[o.0].is_none() {
                return Err(NetlistError::UndefinedNet {
                    line: *line,
                    net: name.clone(),
                });
            }
        }

        let order = topo_order(&gates, &drivers).map_err(|gi| NetlistError::Cycle {
            line: self.gates[gi].3,
            net: names[gates[gi].output.0].clone(),
        })?;

        Ok(Netlist {
            names,
            index,
            primary_inputs,
            key_inputs,
            outputs,
            gates,
            drivers,
            order,
        })
    }
}

/// Kahn's algorithm over gates, smallest ready gate index first. On failure
/// returns the lowest-index gate left on a cycle.
fn topo_order(gates: &[Gate], drivers: &[Option<Driver>]) -> Result<Vec<usize>, usize> {
    let mut pending = vec![0usize; gates.len()];
    let mut readers: Vec<Vec<usize>> = vec![Vec::new(); gates.len()];
    for (gi, g) in gates.iter().enumerate() {
        for i in &g.inputs {
            if let Some(Driver::Gate(src)) = drivers[i.0] {
                pending[gi] += 1;
                readers[src].push(gi);
            }
        }
    }
    let mut ready: std::collections::BTreeSet<usize> =
        (0..gates.len()).filter(|&g| pending[g] == 0).collect();
    let mut order = Vec::with_capacity(gates.len());
    while let Some(g) = ready.pop_first() {
        order.push(g);
        for &r in &readers[g] {
            pending[r] -= 1;
            if pending[r] == 0 {
                ready.insert(r);
            }
        }
    }
    if order.len() == gates.len() {
        Ok(order)
    } else {
        Err((0..gates.len()).find(|&g| pending[g] > 0).unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig4a() -> Netlist {
        let mut b = NetlistBuilder::new();
        b.input("a").input("b").input("c").output("o");
        b.gate("g1", GateKind::And, &["a", "b"]);
        b.gate("o", GateKind::Or, &["g1", "c"]);
        b.build().unwrap()
    }

    fn fig4b() -> Netlist {
        let mut b = NetlistBuilder::new();
        b.input("a").input("b").input("c").key_input("key").output("o");
        b.gate("g1", GateKind::And, &["a", "b"]);
        b.gate("g2", GateKind::Xor, &["g1", "key"]);
        b.gate("o", GateKind::Or, &["g2", "c"]);
        b.build().unwrap()
    }

    fn column(t: &TruthTable) -> String {
        t.rows.iter().map(|r| if r[0] { '1' } else { '0' }).collect()
    }

    #[test]
    fn locked_example_rows() {
        let n = fig4b();
        let bits = |s| parse_bits(s).unwrap();
        assert_eq!(n.evaluate(&bits("110"), &[false]).unwrap(), vec![true]);
        assert_eq!(n.evaluate(&bits("110"), &[true]).unwrap(), vec![false]);
        assert_eq!(n.evaluate(&bits("000"), &[true]).unwrap(), vec![true]);
    }

    #[test]
    fn truth_table_columns() {
        assert_eq!(column(&fig4a().truth_table(None).unwrap()), "01010111");
        let n = fig4b();
        assert_eq!(column(&n.truth_table(Some(&KeyVector(vec![false]))).unwrap()), "01010111");
        assert_eq!(column(&n.truth_table(Some(&KeyVector(vec![true]))).unwrap()), "11111101");
        assert!(matches!(n.truth_table(None), Err(NetlistError::KeyLength { .. })));
    }

    #[test]
    fn truth_table_limit() {
        let n = fig4a();
        assert_eq!(
            n.truth_table_limited(None, 2),
            Err(NetlistError::TooManyInputs { limit: 2, got: 3 })
        );
        assert_eq!(n.truth_table(None).unwrap().rows.len(), 8);
    }

    #[test]
    fn constant_circuit() {
        let mut b = NetlistBuilder::new();
        b.input("a").output("y").gate("y", GateKind::Const1, &[]);
        let t = b.build().unwrap().truth_table(None).unwrap();
        assert_eq!(t.rows, vec![vec![true], vec![true]]);
    }

    #[test]
    fn equivalence_with_keys() {
        let (a, b) = (fig4a(), fig4b());
        assert!(equivalent_exhaustive(&a, &a, None, None).unwrap());
        assert!(equivalent_exhaustive(&a, &b, None, Some(&KeyVector(vec![false]))).unwrap());
        assert!(!equivalent_exhaustive(&a, &b, None, Some(&KeyVector(vec![true]))).unwrap());
    }

    #[test]
    fn length_mismatch() {
        assert_eq!(
            fig4a().evaluate(&[true], &[]),
            Err(NetlistError::InputLength { expected: 3, got: 1 })
        );
    }

    #[test]
    fn builder_rejects_bad_structure() {
        let mut b = NetlistBuilder::new();
        b.input("a").gate("a", GateKind::Not, &["a"]);
        assert!(matches!(b.build(), Err(NetlistError::DuplicateDefinition { .. })));

        let mut b = NetlistBuilder::new();
        b.gate("x", GateKind::Not, &["y"]).gate("y", GateKind::Not, &["x"]);
        assert!(matches!(b.build(), Err(NetlistError::Cycle { .. })));

        let mut b = NetlistBuilder::new();
        b.output("z");
        assert!(matches!(b.build(), Err(NetlistError::UndefinedNet { .. })));

        let mut b = NetlistBuilder::new();
        b.input("a").gate("x", GateKind::And, &["a"]);
        assert!(matches!(b.build(), Err(NetlistError::Arity { .. })));
    }

    #[test]
    fn round_trip_through_builder() {
        let n = fig4b();
        assert_eq!(n.to_builder().build().unwrap(), n);
    }
}
