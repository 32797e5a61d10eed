// SPDX-License-Identifier: Apache-2.0

//! Propositional formulas in the syntax of browser-based SAT playgrounds:
//! `~` or `-` (not), `&`, `|`, `+` (xor), `=>`, `<=>`, parentheses.
//!
//! Binding from loosest to tightest: `<=>`, `=>` (right-associative), `|`,
//! `+`, `&`, negation.

use std::collections::HashMap;

use super::tseytin::{encode_equiv, encode_nary, Op};
use super::{CnfError, CnfFormula, Lit, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Xor,
    Implies,
    Iff,
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, CnfError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'~' | b'-' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'+' => Tok::Xor,
            b'(' => Tok::Open,
            b')' => Tok::Close,
            b'=' if text[i..].starts_with("=>") => {
                i += 1;
                Tok::Implies
            }
            b'<' if text[i..].starts_with("<=>") => {
                i += 2;
                Tok::Iff
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                return Err(CnfError::Syntax {
                    pos: i,
                    message: format!("unexpected character {:?}", c as char),
                })
            }
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn error(&self, message: &str) -> CnfError {
        CnfError::Syntax {
            pos: self.offset(),
            message: message.to_string(),
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Expr, CnfError> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::Iff) {
            lhs = Expr::Iff(Box::new(lhs), Box::new(self.implies()?));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Expr, CnfError> {
        let lhs = self.binary(0)?;
        if self.eat(&Tok::Implies) {
            return Ok(Expr::Implies(Box::new(lhs), Box::new(self.implies()?)));
        }
        Ok(lhs)
    }

    /// Left-associative levels: 0 = `|`, 1 = `+`, 2 = `&`.
    fn binary(&mut self, level: usize) -> Result<Expr, CnfError> {
        const LEVELS: [Tok; 3] = [Tok::Or, Tok::Xor, Tok::And];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        while self.eat(&LEVELS[level]) {
            let rhs = Box::new(self.binary(level + 1)?);
            let l = Box::new(lhs);
            lhs = match level {
                0 => Expr::Or(l, rhs),
                1 => Expr::Xor(l, rhs),
                _ => Expr::And(l, rhs),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, CnfError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Expr::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let e = self.iff()?;
                if !self.eat(&Tok::Close) {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Expr::Var(name))
            }
            _ => Err(self.error("expected a variable, `~` or `(`")),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, CnfError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        end: text.len(),
    };
    let e = p.iff()?;
    if p.pos != p.toks.len() {
        return Err(p.error("trailing input"));
    }
    Ok(e)
}

/// A formula lowered to CNF. Named variables get the lowest ids, in order of
/// first appearance; auxiliary variables follow.
#[derive(Debug, Clone)]
pub struct PropCnf {
    pub formula: CnfFormula,
    names: Vec<String>,
    index: HashMap<String, Var>,
}

impl PropCnf {
    pub fn var(&self, name: &str) -> Option<Var> {
        self.index.get(name).copied()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

fn collect_names(e: &Expr, names: &mut Vec<String>, index: &mut HashMap<String, Var>) {
    match e {
        Expr::Var(n) => {
            if !index.contains_key(n) {
                names.push(n.clone());
                index.insert(n.clone(), Var::new(names.len() as u32));
            }
        }
        Expr::Not(a) => collect_names(a, names, index),
        Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
            collect_names(a, names, index);
            collect_names(b, names, index);
        }
    }
}

/// Literal equivalent to `e`, adding Tseytin clauses for inner nodes.
fn lower(f: &mut CnfFormula, index: &HashMap<String, Var>, e: &Expr) -> Lit {
    let node = |f: &mut CnfFormula, op: Op, a: Lit, b: Lit| {
        let out = f.new_var().pos();
        encode_nary(f, op, out, &[a, b]);
        out
    };
    match e {
        Expr::Var(n) => index[n].pos(),
        Expr::Not(a) => !lower(f, index, a),
        Expr::And(a, b) => {
            let (a, b) = (lower(f, index, a), lower(f, index, b));
            node(f, Op::And, a, b)
        }
        Expr::Or(a, b) => {
            let (a, b) = (lower(f, index, a), lower(f, index, b));
            node(f, Op::Or, a, b)
        }
        Expr::Xor(a, b) => {
            let (a, b) = (lower(f, index, a), lower(f, index, b));
            node(f, Op::Xor, a, b)
        }
        Expr::Iff(a, b) => {
            let (a, b) = (lower(f, index, a), lower(f, index, b));
            !node(f, Op::Xor, a, b)
        }
        Expr::Implies(a, b) => {
            let (a, b) = (lower(f, index, a), lower(f, index, b));
            node(f, Op::Or, !a, b)
        }
    }
}

/// Asserts `e`, splitting top-level conjunctions into separate roots.
fn assert_expr(f: &mut CnfFormula, index: &HashMap<String, Var>, e: &Expr) {
    match e {
        Expr::And(a, b) => {
            assert_expr(f, index, a);
            assert_expr(f, index, b);
        }
        Expr::Iff(a, b) => {
            let (a, b) = (lower(f, index, a), lower(f, index, b));
            encode_equiv(f, a, b);
        }
        _ => {
            let l = lower(f, index, e);
            f.add_unit(l);
        }
    }
}

pub fn to_cnf(e: &Expr) -> PropCnf {
    let mut names = Vec::new();
    let mut index = HashMap::new();
    collect_names(e, &mut names, &mut index);
    let mut formula = CnfFormula::with_vars(names.len() as u32);
    assert_expr(&mut formula, &index, e);
    PropCnf {
        formula,
        names,
        index,
    }
}

pub fn parse_to_cnf(text: &str) -> Result<PropCnf, CnfError> {
    Ok(to_cnf(&parse_expr(text)?))
}

impl Expr {
    pub fn eval(&self, env: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Expr::Var(n) => env(n),
            Expr::Not(a) => !a.eval(env),
            Expr::And(a, b) => a.eval(env) && b.eval(env),
            Expr::Or(a, b) => a.eval(env) || b.eval(env),
            Expr::Xor(a, b) => a.eval(env) ^ b.eval(env),
            Expr::Implies(a, b) => !a.eval(env) || b.eval(env),
            Expr::Iff(a, b) => a.eval(env) == b.eval(env),
        }
    }
}
