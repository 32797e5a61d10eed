// SPDX-License-Identifier: Apache-2.0

//! ISCAS-style BENCH reader and writer.
//!
//! ```text
//! # comment
//! INPUT(a)
//! INPUT(key0)
//! OUTPUT(y)
//! y = XOR(a, key0)
//! ```
//!
//! Inputs whose name starts with the key prefix become key inputs.

use std::fmt::Write;

use super::{GateKind, Netlist, NetlistBuilder, NetlistError};

pub const DEFAULT_KEY_PREFIX: &str = "key";

const SEQUENTIAL: [&str; 4] = ["DFF", "DFFR", "LATCH", "FF"];

pub fn parse_bench(text: &str) -> Result<Netlist, NetlistError> {
    parse_bench_with_prefix(text, DEFAULT_KEY_PREFIX)
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '[' | ']' | '$' | '/'))
}

/// Splits `NAME(args)` into the name and its comma-separated arguments.
fn call(text: &str) -> Option<(&str, Vec<&str>)> {
    let open = text.find('(')?;
    let inner = text[open + 1..].strip_suffix(')')?;
    let name = text[..open].trim();
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(str::trim).collect()
    };
    Some((name, args))
}

pub fn parse_bench_with_prefix(text: &str, key_prefix: &str) -> Result<Netlist, NetlistError> {
    let mut builder = NetlistBuilder::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        builder.at_line(line);
        let syntax = |message: &str| NetlistError::Syntax {
            line,
            message: message.to_string(),
        };

        if let Some((lhs, rhs)) = content.split_once('=') {
            let out = lhs.trim();
            if !is_identifier(out) {
                return Err(syntax(&format!("bad net name {out:?}")));
            }
            let (kind_name, args) = call(rhs.trim()).ok_or_else(|| syntax("expected KIND(inputs)"))?;
            if SEQUENTIAL.contains(&kind_name.to_ascii_uppercase().as_str()) {
                return Err(NetlistError::Sequential {
                    line,
                    kind: kind_name.to_string(),
                });
            }
            let kind = GateKind::from_name(kind_name).ok_or_else(|| NetlistError::UnknownGate {
                line,
                kind: kind_name.to_string(),
            })?;
            if let Some(bad) = args.iter().find(|a| !is_identifier(a)) {
                return Err(syntax(&format!("bad net name {bad:?}")));
            }
            builder.gate(out, kind, &args);
        } else {
            let (directive, args) = call(content).ok_or_else(|| syntax("unrecognised statement"))?;
            let [name] = args.as_slice() else {
                return Err(syntax(&format!("{directive} takes exactly one net")));
            };
            if !is_identifier(name) {
                return Err(syntax(&format!("bad net name {name:?}")));
            }
            match directive.to_ascii_uppercase().as_str() {
                "INPUT" if name.starts_with(key_prefix) && !key_prefix.is_empty() => {
                    builder.key_input(name);
                }
                "INPUT" => {
                    builder.input(name);
                }
                "OUTPUT" => {
                    builder.output(name);
                }
                _ => return Err(syntax(&format!("unknown directive {directive:?}"))),
            }
        }
    }
    builder.build()
}

/// Canonical text: header comment, primary inputs, key inputs, outputs,
/// then gates in their stored order.
pub fn serialize_bench(n: &Netlist) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# {} inputs, {} key inputs, {} outputs, {} gates",
        n.primary_inputs().len(),
        n.key_inputs().len(),
        n.outputs().len(),
        n.gates().len()
    )
    .unwrap();
    for &i in n.primary_inputs().iter().chain(n.key_inputs()) {
        writeln!(out, "INPUT({})", n.name(i)).unwrap();
    }
    for &o in n.outputs() {
        writeln!(out, "OUTPUT({})", n.name(o)).unwrap();
    }
    for g in n.gates() {
        let ins: Vec<&str> = g.inputs.iter().map(|&i| n.name(i)).collect();
        writeln!(out, "{} = {}({})", n.name(g.output), g.kind, ins.join(", ")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG6: &str = include_str!("../../assets/fig6.bench");
    const FIG4B: &str = include_str!("../../assets/fig4b.bench");

    #[test]
    fn parses_worked_example() {
        let n = parse_bench(FIG6).unwrap();
        assert_eq!(n.primary_inputs().len(), 3);
        assert_eq!(n.key_inputs().len(), 3);
        assert_eq!(n.outputs().len(), 1);
        assert_eq!(n.gates().len(), 8);
    }

    #[test]
    fn empty_file_is_valid() {
        let n = parse_bench("").unwrap();
        assert!(n.is_empty());
        let text = serialize_bench(&n);
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with('#'));
        assert_eq!(parse_bench(&text).unwrap(), n);
    }

    #[test]
    fn round_trip_preserves_structure() {
        for src in [FIG6, FIG4B] {
            let n = parse_bench(src).unwrap();
            let again = parse_bench(&serialize_bench(&n)).unwrap();
            assert_eq!(again, n);
        }
    }

    #[test]
    fn gate_order_is_preserved() {
        let n = parse_bench("INPUT(a)\nOUTPUT(z)\nz = NOT(y)\ny = BUF(a)\n").unwrap();
        let text = serialize_bench(&n);
        let z = text.find("z = NOT(y)").unwrap();
        let y = text.find("y = BUF(a)").unwrap();
        assert!(z < y);
    }

    #[test]
    fn error_kinds_carry_lines() {
        assert!(matches!(
            parse_bench("INPUT(a)\nx = AND(x)\n"),
            Err(NetlistError::Arity { line: Some(2), .. })
        ));
        assert!(matches!(
            parse_bench("INPUT(a)\nx = AND(x, a)\n"),
            Err(NetlistError::Cycle { line: Some(2), .. })
        ));
        assert!(matches!(
            parse_bench("INPUT(a)\nINPUT(a)\n"),
            Err(NetlistError::DuplicateDefinition { line: Some(2), .. })
        ));
        assert!(matches!(
            parse_bench("INPUT(a)\n\nx = AND(a, b)\n"),
            Err(NetlistError::UndefinedNet { line: Some(3), .. })
        ));
        assert!(matches!(
            parse_bench("INPUT(a)\nx = MUX(a, a)\n"),
            Err(NetlistError::UnknownGate { line: 2, .. })
        ));
        assert!(matches!(
            parse_bench("INPUT(a)\nx = DFF(a)\n"),
            Err(NetlistError::Sequential { line: 2, .. })
        ));
        assert!(matches!(
            parse_bench("INPUT a\n"),
            Err(NetlistError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn key_prefix_is_configurable() {
        let text = "INPUT(a)\nINPUT(lock_0)\nOUTPUT(y)\ny = XOR(a, lock_0)\n";
        assert_eq!(parse_bench(text).unwrap().key_inputs().len(), 0);
        assert_eq!(parse_bench_with_prefix(text, "lock_").unwrap().key_inputs().len(), 1);
    }

    #[test]
    fn comments_and_whitespace() {
        let n = parse_bench("# hi\n  INPUT( a )  # trailing\nOUTPUT(y)\ny = buff( a )\n").unwrap();
        assert_eq!(n.gates()[0].kind, GateKind::Buf);
    }
}
