// SPDX-License-Identifier: Apache-2.0

//! Seeded random netlists for property tests and benchmarks.

use super::{GateKind, Netlist, NetlistBuilder};
use crate::prng::SplitMix64;

#[derive(Debug, Clone, Copy)]
pub struct RandomNetlistParams {
    pub inputs: usize,
    pub keys: usize,
    pub gates: usize,
    pub outputs: usize,
    /// Largest fan-in for n-ary gates (at least 2).
    pub max_fanin: usize,
}

impl Default for RandomNetlistParams {
    fn default() -> Self {
        Self {
            inputs: 4,
            keys: 0,
            gates: 10,
            outputs: 2,
            max_fanin: 3,
        }
    }
}

const KINDS: [GateKind; 8] = [
    GateKind::And,
    GateKind::Nand,
    GateKind::Or,
    GateKind::Nor,
    GateKind::Xor,
    GateKind::Xnor,
    GateKind::Not,
    GateKind::Buf,
];

/// A DAG where each gate reads only earlier nets. Outputs are drawn from
/// the last gates so most of the logic is observable.
pub fn random_netlist(params: RandomNetlistParams, seed: u64) -> Netlist {
    assert!(params.inputs + params.keys > 0, "need at least one source net");
    assert!(params.max_fanin >= 2);
    let mut rng = SplitMix64::new(seed);
    let mut b = NetlistBuilder::new();
    let mut nets: Vec<String> = Vec::new();
    for i in 0..params.inputs {
        let name = format!("i{i}");
        b.input(&name);
        nets.push(name);
    }
    for k in 0..params.keys {
        let name = format!("keyinput{k}");
        b.key_input(&name);
        nets.push(name);
    }
    for g in 0..params.gates {
        let kind = KINDS[rng.below(KINDS.len() as u64) as usize];
        let arity = match kind {
            GateKind::Not | GateKind::Buf => 1,
            _ => 2 + rng.below(params.max_fanin as u64 - 1) as usize,
        };
        // Bias toward recent nets so the logic gets some depth.
        let inputs: Vec<String> = (0..arity)
            .map(|_| {
                let window = nets.len().min(6);
                let pick = if rng.below(2) == 0 {
                    nets.len() - 1 - rng.below(window as u64) as usize
                } else {
                    rng.below(nets.len() as u64) as usize
                };
                nets[pick].clone()
            })
            .collect();
        let name = format!("n{g}");
        let refs: Vec<&str> = inputs.iter().map(String::as_str).collect();
        b.gate(&name, kind, &refs);
        nets.push(name);
    }
    let sources = params.inputs + params.keys;
    let candidates = &nets[if params.gates > 0 { sources } else { 0 }..];
    let mut chosen: Vec<&String> = Vec::new();
    for (i, net) in candidates.iter().rev().enumerate() {
        if chosen.len() == params.outputs {
            break;
        }
        if i == 0 || rng.below(2) == 0 {
            chosen.push(net);
        }
    }
    for o in chosen {
        b.output(o);
    }
    b.build().expect("generator only references earlier nets")
}
