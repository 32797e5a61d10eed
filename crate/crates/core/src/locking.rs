// SPDX-License-Identifier: Apache-2.0

//! Random logic locking with XOR/XNOR key gates.
//!
//! An XOR key gate passes its net through when the key bit is 0, an XNOR
//! gate when the key bit is 1.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::netlist::{
    equivalent_exhaustive_limited, GateKind, KeyVector, NetId, Netlist, NetlistBuilder, NetlistError,
};
use crate::prng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LockError {
    #[error("cannot lock an empty netlist")]
    EmptyNetlist,
    #[error("netlist already has {0} key input(s)")]
    AlreadyLocked(usize),
    #[error("requested {requested} key gates but only {available} nets are lockable")]
    TooManyKeys { requested: usize, available: usize },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyGate {
    /// Net whose consumers now read the key gate.
    pub target: String,
    pub key_input: String,
    pub gate_output: String,
    pub kind: GateKind,
    pub correct_bit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LockRecord {
    pub gates: Vec<KeyGate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LockedDesign {
    pub locked: Netlist,
    pub key: KeyVector,
    pub record: LockRecord,
}

/// Nets eligible for a key gate: primary inputs and gate outputs that are
/// read by something, in declaration order.
pub fn lockable_nets(n: &Netlist) -> Vec<NetId> {
    let fanout = n.fanout_counts();
    n.primary_inputs()
        .iter()
        .copied()
        .chain(n.gates().iter().map(|g| g.output))
        .filter(|net| fanout[net.0] > 0)
        .collect()
}

pub fn random_lock(n: &Netlist, num_keys: usize, seed: u64) -> Result<LockedDesign, LockError> {
    random_lock_with_prefix(n, num_keys, seed, "keyinput")
}

fn fresh_name(base: String, taken: &mut HashSet<String>) -> String {
    let mut name = base.clone();
    let mut suffix = 0;
    while taken.contains(&name) {
        suffix += 1;
        name = format!("{base}_{suffix}");
    }
    taken.insert(name.clone());
    name
}

/// Inserts `num_keys` key gates at distinct nets picked by a seeded shuffle.
/// Key inputs are named `{key_prefix}{i}`.
pub fn random_lock_with_prefix(
    n: &Netlist,
    num_keys: usize,
    seed: u64,
    key_prefix: &str,
) -> Result<LockedDesign, LockError> {
    if n.is_empty() {
        return Err(LockError::EmptyNetlist);
    }
    if !n.key_inputs().is_empty() {
        return Err(LockError::AlreadyLocked(n.key_inputs().len()));
    }
    let mut pool = lockable_nets(n);
    if num_keys > pool.len() {
        return Err(LockError::TooManyKeys {
            requested: num_keys,
            available: pool.len(),
        });
    }

    let mut rng = SplitMix64::new(seed);
    rng.shuffle(&mut pool);
    pool.truncate(num_keys);

    let mut taken: HashSet<String> = (0..n.num_nets()).map(|i| n.name(NetId(i)).to_string()).collect();
    let mut record = LockRecord::default();
    let mut replacement: HashMap<NetId, String> = HashMap::new();
    for (i, &net) in pool.iter().enumerate() {
        let kind = if rng.next_u64() & 1 == 1 {
            GateKind::Xnor
        } else {
            GateKind::Xor
        };
        let key_input = fresh_name(format!("{key_prefix}{i}"), &mut taken);
        let gate_output = fresh_name(format!("{}_lk{i}", n.name(net)), &mut taken);
        replacement.insert(net, gate_output.clone());
        record.gates.push(KeyGate {
            target: n.name(net).to_string(),
            key_input,
            gate_output,
            kind,
            correct_bit: kind == GateKind::Xnor,
        });
    }
    let gate_for: HashMap<&str, &KeyGate> = record.gates.iter().map(|g| (g.target.as_str(), g)).collect();
    let rewired = |net: NetId| -> &str { replacement.get(&net).map(String::as_str).unwrap_or(n.name(net)) };

    let mut b = NetlistBuilder::new();
    for &i in n.primary_inputs() {
        b.input(n.name(i));
    }
    for kg in &record.gates {
        b.key_input(&kg.key_input);
    }
    for &o in n.outputs() {
        b.output(rewired(o));
    }
    let emit_key_gate = |b: &mut NetlistBuilder, net: &str| {
        if let Some(kg) = gate_for.get(net) {
            b.gate(&kg.gate_output, kg.kind, &[net, &kg.key_input]);
        }
    };
    for &i in n.primary_inputs() {
        emit_key_gate(&mut b, n.name(i));
    }
    for g in n.gates() {
        let ins: Vec<&str> = g.inputs.iter().map(|&i| rewired(i)).collect();
        b.gate(n.name(g.output), g.kind, &ins);
        emit_key_gate(&mut b, n.name(g.output));
    }

    let key = KeyVector(record.gates.iter().map(|g| g.correct_bit).collect());
    Ok(LockedDesign {
        locked: b.build()?,
        key,
        record,
    })
}

/// Folds a gate whose inputs are partly constant. `None` means the gate is
/// unaffected; otherwise the simplified kind and remaining inputs.
fn fold_gate(kind: GateKind, inputs: &[NetId], consts: &HashMap<NetId, bool>) -> Option<(GateKind, Vec<NetId>)> {
    if !inputs.iter().any(|i| consts.contains_key(i)) {
        return None;
    }
    let rest: Vec<NetId> = inputs.iter().copied().filter(|i| !consts.contains_key(i)).collect();
    let fixed = inputs.iter().filter_map(|i| consts.get(i).copied());
    let constant = |v: bool| Some((if v { GateKind::Const1 } else { GateKind::Const0 }, Vec::new()));

    // (identity kind, whether the gate inverts)
    let (base, invert) = match kind {
        GateKind::And | GateKind::Nand | GateKind::Or | GateKind::Nor => {
            let is_and = matches!(kind, GateKind::And | GateKind::Nand);
            let invert = matches!(kind, GateKind::Nand | GateKind::Nor);
            // A controlling value decides the output outright.
            let controlling = !is_and;
            if fixed.clone().any(|v| v == controlling) {
                return constant(controlling ^ invert);
            }
            (if is_and { GateKind::And } else { GateKind::Or }, invert)
        }
        GateKind::Xor | GateKind::Xnor => {
            let parity = fixed.fold(false, |acc, v| acc ^ v);
            (GateKind::Xor, (kind == GateKind::Xnor) ^ parity)
        }
        GateKind::Not | GateKind::Buf => {
            let v = consts[&inputs[0]];
            return constant(v ^ (kind == GateKind::Not));
        }
        GateKind::Const0 | GateKind::Const1 => return None,
    };
    match rest.len() {
        0 => {
            let empty_value = base == GateKind::And;
            constant(if base == GateKind::Xor { invert } else { empty_value ^ invert })
        }
        1 => Some((if invert { GateKind::Not } else { GateKind::Buf }, rest)),
        _ => Some((if invert { base.negated() } else { base }, rest)),
    }
}

/// Ties every key input to its bit and propagates the constants. The result
/// has no key inputs.
pub fn apply_key(locked: &Netlist, key: &KeyVector) -> Result<Netlist, LockError> {
    if key.len() != locked.key_inputs().len() {
        return Err(NetlistError::KeyLength {
            expected: locked.key_inputs().len(),
            got: key.len(),
        }
        .into());
    }
    let mut consts: HashMap<NetId, bool> = locked.key_inputs().iter().copied().zip(key.bits().iter().copied()).collect();
    let mut folded: HashMap<usize, (GateKind, Vec<NetId>)> = HashMap::new();
    for &gi in locked.topological_order() {
        let g = &locked.gates()[gi];
        if let Some((kind, inputs)) = fold_gate(g.kind, &g.inputs, &consts) {
            match kind {
                GateKind::Const0 => {
                    consts.insert(g.output, false);
                }
                GateKind::Const1 => {
                    consts.insert(g.output, true);
                }
                _ => {}
            }
            folded.insert(gi, (kind, inputs));
        }
    }

    let mut b = NetlistBuilder::new();
    for &i in locked.primary_inputs() {
        b.input(locked.name(i));
    }
    for &o in locked.outputs() {
        b.output(locked.name(o));
    }
    for (gi, g) in locked.gates().iter().enumerate() {
        let (kind, inputs) = folded.get(&gi).map(|(k, i)| (*k, i.as_slice())).unwrap_or((g.kind, &g.inputs));
        let names: Vec<&str> = inputs.iter().map(|&i| locked.name(i)).collect();
        b.gate(locked.name(g.output), kind, &names);
    }
    Ok(b.build()?)
}

/// Share of wrong keys that change at least one output somewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorruptionStats {
    pub wrong_keys: u64,
    pub distinguishable: u64,
}

impl CorruptionStats {
    pub fn fraction(&self) -> f64 {
        if self.wrong_keys == 0 {
            0.0
        } else {
            self.distinguishable as f64 / self.wrong_keys as f64
        }
    }
}

/// Exhaustively checks every key other than `correct` against `original`.
pub fn wrong_key_corruption(
    original: &Netlist,
    locked: &Netlist,
    correct: &KeyVector,
    input_limit: usize,
) -> Result<CorruptionStats, LockError> {
    let k = locked.key_inputs().len();
    let mut stats = CorruptionStats {
        wrong_keys: 0,
        distinguishable: 0,
    };
    for idx in 0..1u64 << k {
        let key = KeyVector(crate::netlist::index_to_bits(idx, k));
        if &key == correct {
            continue;
        }
        stats.wrong_keys += 1;
        if !equivalent_exhaustive_limited(original, locked, None, Some(&key), input_limit)? {
            stats.distinguishable += 1;
        }
    }
    Ok(stats)
}
