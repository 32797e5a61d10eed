// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use super::{CnfError, CnfFormula, Lit};

/// `p cnf V C` header followed by one zero-terminated line per clause.
pub fn to_dimacs(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars(), f.clauses().len());
    for c in f.clauses() {
        for l in c {
            write!(out, "{l} ").unwrap();
        }
        out.push_str("0\n");
    }
    out
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
    let mut formula: Option<CnfFormula> = None;
    let mut declared = 0usize;
    let mut pending: Vec<Lit> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let err = |message: String| CnfError::Dimacs { line, message };
        let content = raw.trim();
        if content.is_empty() || content.starts_with('c') || content.starts_with('%') {
            continue;
        }
        if let Some(header) = content.strip_prefix('p') {
            if formula.is_some() {
                return Err(err("duplicate header".into()));
            }
            let fields: Vec<&str> = header.split_whitespace().collect();
            let [fmt, vars, clauses] = fields.as_slice() else {
                return Err(err("expected `p cnf VARS CLAUSES`".into()));
            };
            if *fmt != "cnf" {
                return Err(err(format!("unsupported format {fmt:?}")));
            }
            let vars: u32 = vars.parse().map_err(|_| err(format!("bad variable count {vars:?}")))?;
            declared = clauses.parse().map_err(|_| err(format!("bad clause count {clauses:?}")))?;
            formula = Some(CnfFormula::with_vars(vars));
            continue;
        }
        let f = formula.as_mut().ok_or_else(|| err("clause before header".into()))?;
        for tok in content.split_whitespace() {
            let v: i32 = tok.parse().map_err(|_| err(format!("bad literal {tok:?}")))?;
            match Lit::from_dimacs(v) {
                None if v == 0 => {
                    f.try_add_clause(pending.drain(..)).map_err(|e| err(e.to_string()))?;
                }
                None => return Err(err(format!("bad literal {tok:?}"))),
                Some(l) => pending.push(l),
            }
        }
    }
    let mut f = formula.ok_or(CnfError::Dimacs {
        line: last_line,
        message: "missing header".into(),
    })?;
    if !pending.is_empty() {
        f.try_add_clause(pending).map_err(|e| CnfError::Dimacs {
            line: last_line,
            message: e.to_string(),
        })?;
    }
    if f.clauses().len() != declared {
        return Err(CnfError::Dimacs {
            line: last_line,
            message: format!("header declares {declared} clauses, found {}", f.clauses().len()),
        });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "c demo\np cnf 3 2\n1 -2 0\n2 3 -1 0\n";
        let f = parse_dimacs(text).unwrap();
        assert_eq!(f.num_vars(), 3);
        assert_eq!(to_dimacs(&f), "p cnf 3 2\n1 -2 0\n2 3 -1 0\n");
        assert_eq!(parse_dimacs(&to_dimacs(&f)).unwrap(), f);
    }

    #[test]
    fn clauses_may_span_lines() {
        let f = parse_dimacs("p cnf 2 1\n1\n-2 0\n").unwrap();
        assert_eq!(f.clauses()[0].len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_dimacs("1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 3 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 2\n1 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n0\n").is_err());
        assert!(parse_dimacs("p dnf 2 1\n1 0\n").is_err());
    }
}
