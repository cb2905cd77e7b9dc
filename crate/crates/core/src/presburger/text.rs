//! Prefix s-expression syntax for formulas.
//!
//! ```text
//! formula := true | false
//!          | (and formula*) | (or formula*) | (not formula)
//!          | (exists var formula) | (forall var formula)
//!          | (= term term) | (!= term term)
//!          | (>= term term) | (<= term term) | (> term term) | (< term term)
//!          | (divides integer term)
//! term    := integer | var | (+ term*) | (- term term*) | (* term*)
//! ```
//!
//! Products must be linear: at most one non-constant factor. `forall` is
//! sugar for `not exists not`. The printer emits the canonical shapes
//! `(= t 0)`, `(>= t 0)`, `(divides m t)`.

use std::fmt;

use thiserror::Error;

use super::{Atom, Formula, LinearTerm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token `{0}` at position {1}")]
    UnexpectedToken(String, usize),
    #[error("expected {expected}, got `{got}` at position {pos}")]
    Expected {
        expected: &'static str,
        got: String,
        pos: usize,
    },
    #[error("term is not linear at position {0}")]
    NonLinear(usize),
    #[error("integer literal out of range at position {0}")]
    IntRange(usize),
    #[error("divisibility modulus must be at least 2, got {0}")]
    BadModulus(i64),
    #[error("keyword `{0}` cannot be used as a variable at position {1}")]
    ReservedWord(String, usize),
    #[error("trailing input after formula at position {0}")]
    TrailingInput(usize),
}

const KEYWORDS: &[&str] = &[
    "and", "or", "not", "exists", "forall", "divides", "true", "false", "+", "-", "*", "=", "!=",
    ">=", "<=", ">", "<",
];

pub fn to_sexpr(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out).expect("writing to String cannot fail");
    out
}

fn write_formula(f: &Formula, out: &mut String) -> fmt::Result {
    use fmt::Write;
    match f {
        Formula::True => write!(out, "true"),
        Formula::False => write!(out, "false"),
        Formula::Atom(Atom::Eq(t)) => write!(out, "(= {} 0)", term_sexpr(t)),
        Formula::Atom(Atom::Geq(t)) => write!(out, "(>= {} 0)", term_sexpr(t)),
        Formula::Atom(Atom::Divides(m, t)) => write!(out, "(divides {m} {})", term_sexpr(t)),
        Formula::Not(g) => {
            write!(out, "(not ")?;
            write_formula(g, out)?;
            write!(out, ")")
        }
        Formula::And(fs) => write_nary("and", fs, out),
        Formula::Or(fs) => write_nary("or", fs, out),
        Formula::Exists(v, g) => {
            write!(out, "(exists {v} ")?;
            write_formula(g, out)?;
            write!(out, ")")
        }
    }
}

fn write_nary(op: &str, fs: &[Formula], out: &mut String) -> fmt::Result {
    use fmt::Write;
    write!(out, "({op}")?;
    for f in fs {
        write!(out, " ")?;
        write_formula(f, out)?;
    }
    write!(out, ")")
}

pub fn term_sexpr(t: &LinearTerm) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (v, c) in t.coeffs() {
        if c == 1 {
            parts.push(v.to_string());
        } else {
            parts.push(format!("(* {c} {v})"));
        }
    }
    if t.constant_part() != 0 || parts.is_empty() {
        parts.push(t.constant_part().to_string());
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Int(i64),
    Symbol(String),
}

fn tokenize(input: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let mut tokens = Vec::new();
    let bytes = input.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '(' => {
                tokens.push((Token::Open, i));
                i += 1;
            }
            ')' => {
                tokens.push((Token::Close, i));
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len() {
                    let c = bytes[i] as char;
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    i += 1;
                }
                let word = &input[start..i];
                let is_int = word
                    .strip_prefix('-')
                    .unwrap_or(word)
                    .chars()
                    .next()
                    .map(|c| c.is_ascii_digit())
                    .unwrap_or(false);
                if is_int {
                    let n: i64 = word.parse().map_err(|_| ParseError::IntRange(start))?;
                    tokens.push((Token::Int(n), start));
                } else {
                    tokens.push((Token::Symbol(word.to_string()), start));
                }
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Result<&(Token, usize), ParseError> {
        self.tokens.get(self.pos).ok_or(ParseError::UnexpectedEnd)
    }

    fn next(&mut self) -> Result<(Token, usize), ParseError> {
        let t = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or(ParseError::UnexpectedEnd)?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        match self.next()? {
            (Token::Close, _) => Ok(()),
            (t, pos) => Err(ParseError::Expected {
                expected: "`)`",
                got: token_name(&t),
                pos,
            }),
        }
    }

    fn parse_formula(&mut self) -> Result<Formula, ParseError> {
        match self.next()? {
            (Token::Symbol(s), pos) => match s.as_str() {
                "true" => Ok(Formula::True),
                "false" => Ok(Formula::False),
                _ => Err(ParseError::UnexpectedToken(s, pos)),
            },
            (Token::Open, _) => {
                let (head, head_pos) = self.next()?;
                let Token::Symbol(op) = head else {
                    return Err(ParseError::Expected {
                        expected: "an operator",
                        got: token_name(&head),
                        pos: head_pos,
                    });
                };
                match op.as_str() {
                    "and" | "or" => {
                        let mut parts = Vec::new();
                        while !matches!(self.peek()?, (Token::Close, _)) {
                            parts.push(self.parse_formula()?);
                        }
                        self.expect_close()?;
                        Ok(if op == "and" {
                            Formula::and(parts)
                        } else {
                            Formula::or(parts)
                        })
                    }
                    "not" => {
                        let inner = self.parse_formula()?;
                        self.expect_close()?;
                        Ok(Formula::not(inner))
                    }
                    "exists" | "forall" => {
                        let (tok, pos) = self.next()?;
                        let Token::Symbol(var) = tok else {
                            return Err(ParseError::Expected {
                                expected: "a variable name",
                                got: token_name(&tok),
                                pos,
                            });
                        };
                        if KEYWORDS.contains(&var.as_str()) {
                            return Err(ParseError::ReservedWord(var, pos));
                        }
                        let body = self.parse_formula()?;
                        self.expect_close()?;
                        Ok(if op == "exists" {
                            Formula::exists(var, body)
                        } else {
                            // forall v f  ==  not exists v not f
                            Formula::not(Formula::exists(var, Formula::not(body)))
                        })
                    }
                    "divides" => {
                        let (tok, pos) = self.next()?;
                        let Token::Int(m) = tok else {
                            return Err(ParseError::Expected {
                                expected: "an integer modulus",
                                got: token_name(&tok),
                                pos,
                            });
                        };
                        if m < 2 {
                            return Err(ParseError::BadModulus(m));
                        }
                        let t = self.parse_term()?;
                        self.expect_close()?;
                        Ok(Formula::Atom(Atom::Divides(m as u64, t)))
                    }
                    "=" | "!=" | ">=" | "<=" | ">" | "<" => {
                        let a = self.parse_term()?;
                        let b = self.parse_term()?;
                        self.expect_close()?;
                        let diff = a.sub(&b).map_err(|_| ParseError::IntRange(head_pos))?;
                        let flip = b.sub(&a).map_err(|_| ParseError::IntRange(head_pos))?;
                        let shift = |t: LinearTerm| {
                            t.add_constant(-1).map_err(|_| ParseError::IntRange(head_pos))
                        };
                        Ok(match op.as_str() {
                            "=" => Formula::eq0(diff),
                            "!=" => Formula::not(Formula::eq0(diff)),
                            ">=" => Formula::geq0(diff),
                            "<=" => Formula::geq0(flip),
                            ">" => Formula::geq0(shift(diff)?),
                            "<" => Formula::geq0(shift(flip)?),
                            _ => unreachable!(),
                        })
                    }
                    _ => Err(ParseError::UnexpectedToken(op, head_pos)),
                }
            }
            (t, pos) => Err(ParseError::Expected {
                expected: "a formula",
                got: token_name(&t),
                pos,
            }),
        }
    }

    fn parse_term(&mut self) -> Result<LinearTerm, ParseError> {
        match self.next()? {
            (Token::Int(n), _) => Ok(LinearTerm::constant(n)),
            (Token::Symbol(s), pos) => {
                if KEYWORDS.contains(&s.as_str()) {
                    Err(ParseError::ReservedWord(s, pos))
                } else {
                    Ok(LinearTerm::var(s))
                }
            }
            (Token::Open, open_pos) => {
                let (head, head_pos) = self.next()?;
                let Token::Symbol(op) = head else {
                    return Err(ParseError::Expected {
                        expected: "`+`, `-` or `*`",
                        got: token_name(&head),
                        pos: head_pos,
                    });
                };
                let overflow = |_| ParseError::IntRange(open_pos);
                match op.as_str() {
                    "+" => {
                        let mut acc = LinearTerm::constant(0);
                        while !matches!(self.peek()?, (Token::Close, _)) {
                            acc = acc.add(&self.parse_term()?).map_err(overflow)?;
                        }
                        self.expect_close()?;
                        Ok(acc)
                    }
                    "-" => {
                        let first = self.parse_term()?;
                        let mut rest = Vec::new();
                        while !matches!(self.peek()?, (Token::Close, _)) {
                            rest.push(self.parse_term()?);
                        }
                        self.expect_close()?;
                        if rest.is_empty() {
                            first.negate().map_err(overflow)
                        } else {
                            let mut acc = first;
                            for t in rest {
                                acc = acc.sub(&t).map_err(overflow)?;
                            }
                            Ok(acc)
                        }
                    }
                    "*" => {
                        let mut factors = Vec::new();
                        while !matches!(self.peek()?, (Token::Close, _)) {
                            factors.push(self.parse_term()?);
                        }
                        self.expect_close()?;
                        let mut acc = LinearTerm::constant(1);
                        for f in factors {
                            acc = multiply_linear(&acc, &f, open_pos)?;
                        }
                        Ok(acc)
                    }
                    _ => Err(ParseError::UnexpectedToken(op, head_pos)),
                }
            }
            (t, pos) => Err(ParseError::Expected {
                expected: "a term",
                got: token_name(&t),
                pos,
            }),
        }
    }
}

fn multiply_linear(
    a: &LinearTerm,
    b: &LinearTerm,
    pos: usize,
) -> Result<LinearTerm, ParseError> {
    let overflow = |_| ParseError::IntRange(pos);
    match (a.is_constant(), b.is_constant()) {
        (Some(c), _) => b.scale(c).map_err(overflow),
        (_, Some(c)) => a.scale(c).map_err(overflow),
        _ => Err(ParseError::NonLinear(pos)),
    }
}

fn token_name(t: &Token) -> String {
    match t {
        Token::Open => "(".to_string(),
        Token::Close => ")".to_string(),
        Token::Int(n) => n.to_string(),
        Token::Symbol(s) => s.clone(),
    }
}

/// Parse a formula from its s-expression text.
pub fn from_sexpr(input: &str) -> Result<Formula, ParseError> {
    let tokens = tokenize(input)?;
    let mut parser = Parser { tokens, pos: 0 };
    let f = parser.parse_formula()?;
    if parser.pos != parser.tokens.len() {
        return Err(ParseError::TrailingInput(parser.tokens[parser.pos].1));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presburger::eliminate;
    use std::collections::BTreeMap;

    #[test]
    fn parse_quantifier_example() {
        let f = from_sexpr("(exists v (and (>= v 0) (= (+ (* 2 v) (* -1 w)) 0)))").unwrap();
        let g = eliminate(&f).unwrap();
        for w in -6..=12 {
            let mut assignment = BTreeMap::new();
            assignment.insert("w".to_string(), w);
            assert_eq!(g.evaluate(&assignment).unwrap(), w >= 0 && w % 2 == 0);
        }
    }

    #[test]
    fn round_trip() {
        let cases = [
            "(and (>= w 0) (divides 2 w))",
            "(or true (not (= w 0)))",
            "(exists v (= (+ v (* -3 w) 5) 0))",
            "false",
        ];
        for src in cases {
            let f = from_sexpr(src).unwrap();
            let printed = to_sexpr(&f);
            let g = from_sexpr(&printed).unwrap();
            assert_eq!(f, g, "round trip through `{printed}`");
        }
    }

    #[test]
    fn forall_is_sugar() {
        let f = from_sexpr("(forall x (>= x 0))").unwrap();
        assert_eq!(
            f,
            Formula::not(Formula::exists(
                "x",
                Formula::not(Formula::geq0(LinearTerm::var("x")))
            ))
        );
    }

    #[test]
    fn comparison_desugaring() {
        let f = from_sexpr("(< w 3)").unwrap();
        let mut a = BTreeMap::new();
        for (w, expected) in [(2, true), (3, false), (4, false)] {
            a.insert("w".to_string(), w);
            assert_eq!(f.evaluate(&a).unwrap(), expected);
        }
    }

    #[test]
    fn rejects_nonlinear() {
        assert!(matches!(
            from_sexpr("(= (* w w) 4)"),
            Err(ParseError::NonLinear(_))
        ));
    }

    #[test]
    fn rejects_garbage() {
        assert!(from_sexpr("(frobnicate w)").is_err());
        assert!(from_sexpr("(= w 0) extra").is_err());
        assert!(from_sexpr("(and (>= w 0)").is_err());
    }
}
