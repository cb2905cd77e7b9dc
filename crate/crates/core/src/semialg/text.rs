//! Text forms of semi-algebraic formulas: a pretty form using the
//! `P_n(f)` / `f = 0` notation, an s-expression form that round-trips, and a
//! JSON mirror for machine output.
//!
//! ```text
//! formula := true | false
//!          | (and formula*) | (or formula*) | (not formula)
//!          | (eq0 poly) | (pow n poly) | (ordle poly poly)
//!          | (ordcong (int*) shift residue modulus)
//!          | (aceq coord residue modulus_exp)
//! poly    := rational | y<k> | (+ poly*) | (- poly poly*) | (* poly*) | (^ poly int)
//! ```
//!
//! Coordinates are written `y1, y2, ..`; `coord` in `aceq` is 1-based.
//! Rationals are `num` or `num/den`.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

use super::{OrdCong, Polynomial, SemiAlgFormula};
use crate::padic::UnitResidue;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token `{0}` at position {1}")]
    UnexpectedToken(String, usize),
    #[error("expected {expected} at position {pos}")]
    Expected { expected: &'static str, pos: usize },
    #[error("malformed number `{0}` at position {1}")]
    BadNumber(String, usize),
    #[error("coordinate index out of range at position {0}")]
    CoordRange(usize),
    #[error("invalid residue: {0}")]
    BadResidue(String),
    #[error("trailing input at position {0}")]
    TrailingInput(usize),
}

// ---------------------------------------------------------------------------
// pretty printer
// ---------------------------------------------------------------------------

/// Human-readable rendering: `P_n(f)`, `f = 0`, `ord(f) <= ord(g)`,
/// `ac[p^M](y_j) = c`, with `∧ ∨ ¬` for the connectives.
pub fn pretty(f: &SemiAlgFormula) -> String {
    let mut out = String::new();
    pretty_rec(f, &mut out);
    out
}

fn pretty_rec(f: &SemiAlgFormula, out: &mut String) {
    match f {
        SemiAlgFormula::True => out.push_str("true"),
        SemiAlgFormula::False => out.push_str("false"),
        SemiAlgFormula::PolyEq(p) => {
            let _ = write!(out, "{p} = 0");
        }
        SemiAlgFormula::PowerPred(n, p) => {
            let _ = write!(out, "P_{n}({p})");
        }
        SemiAlgFormula::OrdLe(a, b) => {
            let _ = write!(out, "ord({a}) <= ord({b})");
        }
        SemiAlgFormula::OrdCong(c) => {
            let mut first = true;
            for (j, &cj) in c.coeffs().iter().enumerate() {
                if cj == 0 {
                    continue;
                }
                if first {
                    if cj == 1 {
                        let _ = write!(out, "ord(y{})", j + 1);
                    } else if cj == -1 {
                        let _ = write!(out, "-ord(y{})", j + 1);
                    } else {
                        let _ = write!(out, "{cj}*ord(y{})", j + 1);
                    }
                    first = false;
                } else if cj < 0 {
                    if cj == -1 {
                        let _ = write!(out, " - ord(y{})", j + 1);
                    } else {
                        let _ = write!(out, " - {}*ord(y{})", -cj, j + 1);
                    }
                } else if cj == 1 {
                    let _ = write!(out, " + ord(y{})", j + 1);
                } else {
                    let _ = write!(out, " + {cj}*ord(y{})", j + 1);
                }
            }
            if first {
                let _ = write!(out, "{}", c.shift());
            } else if c.shift() > 0 {
                let _ = write!(out, " + {}", c.shift());
            } else if c.shift() < 0 {
                let _ = write!(out, " - {}", -c.shift());
            }
            let _ = write!(out, " ≡ {} (mod {})", c.residue(), c.modulus());
        }
        SemiAlgFormula::AcEq(j, c) => {
            let _ = write!(
                out,
                "ac[{}^{}](y{}) = {}",
                c.prime(),
                c.modulus_exp(),
                j + 1,
                c.value()
            );
        }
        SemiAlgFormula::Not(g) => {
            out.push_str("¬(");
            pretty_rec(g, out);
            out.push(')');
        }
        SemiAlgFormula::And(fs) => pretty_nary(fs, " ∧ ", "true", out),
        SemiAlgFormula::Or(fs) => pretty_nary(fs, " ∨ ", "false", out),
    }
}

fn pretty_nary(fs: &[SemiAlgFormula], sep: &str, empty: &str, out: &mut String) {
    if fs.is_empty() {
        out.push_str(empty);
        return;
    }
    if fs.len() == 1 {
        pretty_rec(&fs[0], out);
        return;
    }
    out.push('(');
    for (i, f) in fs.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        pretty_rec(f, out);
    }
    out.push(')');
}

// ---------------------------------------------------------------------------
// s-expressions
// ---------------------------------------------------------------------------

pub fn to_sexpr(f: &SemiAlgFormula) -> String {
    let mut out = String::new();
    sexpr_rec(f, &mut out);
    out
}

fn sexpr_rec(f: &SemiAlgFormula, out: &mut String) {
    match f {
        SemiAlgFormula::True => out.push_str("true"),
        SemiAlgFormula::False => out.push_str("false"),
        SemiAlgFormula::PolyEq(p) => {
            let _ = write!(out, "(eq0 {})", poly_sexpr(p));
        }
        SemiAlgFormula::PowerPred(n, p) => {
            let _ = write!(out, "(pow {n} {})", poly_sexpr(p));
        }
        SemiAlgFormula::OrdLe(a, b) => {
            let _ = write!(out, "(ordle {} {})", poly_sexpr(a), poly_sexpr(b));
        }
        SemiAlgFormula::OrdCong(c) => {
            let coeffs: Vec<String> = c.coeffs().iter().map(|x| x.to_string()).collect();
            let _ = write!(
                out,
                "(ordcong ({}) {} {} {})",
                coeffs.join(" "),
                c.shift(),
                c.residue(),
                c.modulus()
            );
        }
        SemiAlgFormula::AcEq(j, c) => {
            let _ = write!(out, "(aceq {} {} {})", j + 1, c.value(), c.modulus_exp());
        }
        SemiAlgFormula::Not(g) => {
            out.push_str("(not ");
            sexpr_rec(g, out);
            out.push(')');
        }
        SemiAlgFormula::And(fs) => {
            out.push_str("(and");
            for g in fs {
                out.push(' ');
                sexpr_rec(g, out);
            }
            out.push(')');
        }
        SemiAlgFormula::Or(fs) => {
            out.push_str("(or");
            for g in fs {
                out.push(' ');
                sexpr_rec(g, out);
            }
            out.push(')');
        }
    }
}

pub fn poly_sexpr(p: &Polynomial) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut terms = Vec::new();
    for (exps, coeff) in p.terms() {
        let mut factors: Vec<String> = Vec::new();
        if !coeff.is_one() || exps.iter().all(|&e| e == 0) {
            factors.push(rational_str(coeff));
        }
        for (i, &e) in exps.iter().enumerate() {
            if e == 1 {
                factors.push(format!("y{}", i + 1));
            } else if e > 1 {
                factors.push(format!("(^ y{} {e})", i + 1));
            }
        }
        terms.push(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            format!("(* {})", factors.join(" "))
        });
    }
    if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        format!("(+ {})", terms.join(" "))
    }
}

fn rational_str(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

// ---------------------------------------------------------------------------
// JSON mirror
// ---------------------------------------------------------------------------

/// A structural JSON rendering; polynomials appear as their s-expression
/// strings. Key order is fixed, so output is deterministic.
pub fn to_json(f: &SemiAlgFormula) -> String {
    let mut out = String::new();
    json_rec(f, &mut out);
    out
}

fn json_rec(f: &SemiAlgFormula, out: &mut String) {
    match f {
        SemiAlgFormula::True => out.push_str("{\"op\":\"true\"}"),
        SemiAlgFormula::False => out.push_str("{\"op\":\"false\"}"),
        SemiAlgFormula::PolyEq(p) => {
            let _ = write!(out, "{{\"op\":\"eq0\",\"poly\":\"{}\"}}", poly_sexpr(p));
        }
        SemiAlgFormula::PowerPred(n, p) => {
            let _ = write!(
                out,
                "{{\"op\":\"pow\",\"n\":{n},\"poly\":\"{}\"}}",
                poly_sexpr(p)
            );
        }
        SemiAlgFormula::OrdLe(a, b) => {
            let _ = write!(
                out,
                "{{\"op\":\"ordle\",\"lhs\":\"{}\",\"rhs\":\"{}\"}}",
                poly_sexpr(a),
                poly_sexpr(b)
            );
        }
        SemiAlgFormula::OrdCong(c) => {
            let coeffs: Vec<String> = c.coeffs().iter().map(|x| x.to_string()).collect();
            let _ = write!(
                out,
                "{{\"op\":\"ordcong\",\"coeffs\":[{}],\"shift\":{},\"residue\":{},\"modulus\":{}}}",
                coeffs.join(","),
                c.shift(),
                c.residue(),
                c.modulus()
            );
        }
        SemiAlgFormula::AcEq(j, c) => {
            let _ = write!(
                out,
                "{{\"op\":\"aceq\",\"coord\":{},\"residue\":\"{}\",\"modulus_exp\":{}}}",
                j + 1,
                c.value(),
                c.modulus_exp()
            );
        }
        SemiAlgFormula::Not(g) => {
            out.push_str("{\"op\":\"not\",\"arg\":");
            json_rec(g, out);
            out.push('}');
        }
        SemiAlgFormula::And(fs) | SemiAlgFormula::Or(fs) => {
            let op = if matches!(f, SemiAlgFormula::And(_)) {
                "and"
            } else {
                "or"
            };
            let _ = write!(out, "{{\"op\":\"{op}\",\"args\":[");
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                json_rec(g, out);
            }
            out.push_str("]}");
        }
    }
}

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

fn tokenize(input: &str) -> Result<Vec<(String, usize)>, ParseError> {
    let mut tokens = Vec::new();
    let bytes = input.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c == '(' || c == ')' {
            tokens.push((c.to_string(), i));
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else {
            let start = i;
            while i < bytes.len() {
                let c = bytes[i] as char;
                if c.is_whitespace() || c == '(' || c == ')' {
                    break;
                }
                i += 1;
            }
            tokens.push((input[start..i].to_string(), start));
        }
    }
    Ok(tokens)
}

fn parse_sexp(tokens: &[(String, usize)], pos: &mut usize) -> Result<Sexp, ParseError> {
    let (tok, at) = tokens.get(*pos).ok_or(ParseError::UnexpectedEnd)?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                let (next, _) = tokens.get(*pos).ok_or(ParseError::UnexpectedEnd)?;
                if next == ")" {
                    *pos += 1;
                    return Ok(Sexp::List(items, *at));
                }
                items.push(parse_sexp(tokens, pos)?);
            }
        }
        ")" => Err(ParseError::UnexpectedToken(")".into(), *at)),
        _ => Ok(Sexp::Atom(tok.clone(), *at)),
    }
}

fn max_coord(sexp: &Sexp, max: &mut usize) {
    match sexp {
        Sexp::Atom(s, _) => {
            if let Some(rest) = s.strip_prefix('y') {
                if let Ok(k) = rest.parse::<usize>() {
                    if k > 0 {
                        *max = (*max).max(k);
                    }
                }
            }
        }
        Sexp::List(items, _) => {
            if let Some(Sexp::Atom(head, _)) = items.first() {
                match head.as_str() {
                    "aceq" => {
                        if let Some(Sexp::Atom(j, _)) = items.get(1) {
                            if let Ok(k) = j.parse::<usize>() {
                                *max = (*max).max(k);
                            }
                        }
                    }
                    "ordcong" => {
                        if let Some(Sexp::List(coeffs, _)) = items.get(1) {
                            *max = (*max).max(coeffs.len());
                        }
                    }
                    _ => {}
                }
            }
            for item in items {
                max_coord(item, max);
            }
        }
    }
}

/// Parse a formula; `p` is needed to type angular residues. Returns the
/// formula along with the inferred coordinate count.
pub fn from_sexpr(input: &str, p: u64) -> Result<(SemiAlgFormula, usize), ParseError> {
    let tokens = tokenize(input)?;
    let mut pos = 0;
    let sexp = parse_sexp(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(ParseError::TrailingInput(tokens[pos].1));
    }
    let mut dim = 0;
    max_coord(&sexp, &mut dim);
    let dim = dim.max(1);
    let formula = build_formula(&sexp, p, dim)?;
    Ok((formula, dim))
}

fn build_formula(sexp: &Sexp, p: u64, dim: usize) -> Result<SemiAlgFormula, ParseError> {
    match sexp {
        Sexp::Atom(s, at) => match s.as_str() {
            "true" => Ok(SemiAlgFormula::True),
            "false" => Ok(SemiAlgFormula::False),
            _ => Err(ParseError::UnexpectedToken(s.clone(), *at)),
        },
        Sexp::List(items, at) => {
            let Some(Sexp::Atom(head, head_at)) = items.first() else {
                return Err(ParseError::Expected {
                    expected: "an operator",
                    pos: *at,
                });
            };
            match head.as_str() {
                "and" | "or" => {
                    let args = items[1..]
                        .iter()
                        .map(|s| build_formula(s, p, dim))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(if head == "and" {
                        SemiAlgFormula::and(args)
                    } else {
                        SemiAlgFormula::or(args)
                    })
                }
                "not" => {
                    if items.len() != 2 {
                        return Err(ParseError::Expected {
                            expected: "exactly one argument to not",
                            pos: *at,
                        });
                    }
                    Ok(SemiAlgFormula::not(build_formula(&items[1], p, dim)?))
                }
                "eq0" => {
                    if items.len() != 2 {
                        return Err(ParseError::Expected {
                            expected: "exactly one polynomial",
                            pos: *at,
                        });
                    }
                    Ok(SemiAlgFormula::PolyEq(build_poly(&items[1], dim)?))
                }
                "pow" => {
                    if items.len() != 3 {
                        return Err(ParseError::Expected {
                            expected: "(pow n poly)",
                            pos: *at,
                        });
                    }
                    let n = atom_u64(&items[1])?;
                    if n < 2 {
                        return Err(ParseError::BadResidue(format!(
                            "power index must be at least 2, got {n}"
                        )));
                    }
                    Ok(SemiAlgFormula::power_pred(n, build_poly(&items[2], dim)?))
                }
                "ordle" => {
                    if items.len() != 3 {
                        return Err(ParseError::Expected {
                            expected: "(ordle poly poly)",
                            pos: *at,
                        });
                    }
                    Ok(SemiAlgFormula::OrdLe(
                        build_poly(&items[1], dim)?,
                        build_poly(&items[2], dim)?,
                    ))
                }
                "ordcong" => {
                    if items.len() != 5 {
                        return Err(ParseError::Expected {
                            expected: "(ordcong (coeffs) shift residue modulus)",
                            pos: *at,
                        });
                    }
                    let Sexp::List(coeff_items, _) = &items[1] else {
                        return Err(ParseError::Expected {
                            expected: "a coefficient list",
                            pos: *at,
                        });
                    };
                    let mut coeffs = vec![0i64; dim];
                    for (j, c) in coeff_items.iter().enumerate() {
                        coeffs[j] = atom_i64(c)?;
                    }
                    let shift = atom_i64(&items[2])?;
                    let residue = atom_i64(&items[3])?;
                    let modulus = atom_u64(&items[4])?;
                    if modulus < 2 {
                        return Err(ParseError::BadResidue(format!(
                            "congruence modulus must be at least 2, got {modulus}"
                        )));
                    }
                    Ok(SemiAlgFormula::OrdCong(OrdCong::new(
                        coeffs, shift, residue, modulus,
                    )))
                }
                "aceq" => {
                    if items.len() != 4 {
                        return Err(ParseError::Expected {
                            expected: "(aceq coord residue modulus_exp)",
                            pos: *at,
                        });
                    }
                    let j = atom_u64(&items[1])? as usize;
                    if j == 0 || j > dim {
                        return Err(ParseError::CoordRange(*at));
                    }
                    let value = atom_u64(&items[2])?;
                    let m = atom_u64(&items[3])? as u32;
                    let residue = UnitResidue::new(p, m, value.into())
                        .map_err(|e| ParseError::BadResidue(e.to_string()))?;
                    Ok(SemiAlgFormula::AcEq(j - 1, residue))
                }
                _ => Err(ParseError::UnexpectedToken(head.clone(), *head_at)),
            }
        }
    }
}

fn atom_i64(sexp: &Sexp) -> Result<i64, ParseError> {
    match sexp {
        Sexp::Atom(s, at) => s
            .parse()
            .map_err(|_| ParseError::BadNumber(s.clone(), *at)),
        Sexp::List(_, at) => Err(ParseError::Expected {
            expected: "an integer",
            pos: *at,
        }),
    }
}

fn atom_u64(sexp: &Sexp) -> Result<u64, ParseError> {
    match sexp {
        Sexp::Atom(s, at) => s
            .parse()
            .map_err(|_| ParseError::BadNumber(s.clone(), *at)),
        Sexp::List(_, at) => Err(ParseError::Expected {
            expected: "a non-negative integer",
            pos: *at,
        }),
    }
}

fn build_poly(sexp: &Sexp, dim: usize) -> Result<Polynomial, ParseError> {
    match sexp {
        Sexp::Atom(s, at) => {
            if let Some(rest) = s.strip_prefix('y') {
                if let Ok(k) = rest.parse::<usize>() {
                    if k == 0 || k > dim {
                        return Err(ParseError::CoordRange(*at));
                    }
                    return Ok(Polynomial::var(dim, k - 1));
                }
            }
            parse_rational(s, *at).map(|r| Polynomial::constant(dim, r))
        }
        Sexp::List(items, at) => {
            let Some(Sexp::Atom(head, head_at)) = items.first() else {
                return Err(ParseError::Expected {
                    expected: "`+`, `-`, `*` or `^`",
                    pos: *at,
                });
            };
            match head.as_str() {
                "+" => {
                    let mut acc = Polynomial::zero(dim);
                    for item in &items[1..] {
                        acc = acc.add(&build_poly(item, dim)?);
                    }
                    Ok(acc)
                }
                "-" => {
                    if items.len() < 2 {
                        return Err(ParseError::Expected {
                            expected: "at least one argument to -",
                            pos: *at,
                        });
                    }
                    let first = build_poly(&items[1], dim)?;
                    if items.len() == 2 {
                        return Ok(first.neg());
                    }
                    let mut acc = first;
                    for item in &items[2..] {
                        acc = acc.sub(&build_poly(item, dim)?);
                    }
                    Ok(acc)
                }
                "*" => {
                    let mut acc = Polynomial::constant(dim, BigRational::one());
                    for item in &items[1..] {
                        acc = acc.mul(&build_poly(item, dim)?);
                    }
                    Ok(acc)
                }
                "^" => {
                    if items.len() != 3 {
                        return Err(ParseError::Expected {
                            expected: "(^ poly exponent)",
                            pos: *at,
                        });
                    }
                    let base = build_poly(&items[1], dim)?;
                    let e = atom_u64(&items[2])? as u32;
                    Ok(base.pow(e))
                }
                _ => Err(ParseError::UnexpectedToken(head.clone(), *head_at)),
            }
        }
    }
}

fn parse_rational(s: &str, at: usize) -> Result<BigRational, ParseError> {
    let parse_int =
        |t: &str| BigInt::from_str(t).map_err(|_| ParseError::BadNumber(s.to_string(), at));
    if let Some((num, den)) = s.split_once('/') {
        let den = parse_int(den)?;
        if den.is_negative() || den == BigInt::from(0) {
            return Err(ParseError::BadNumber(s.to_string(), at));
        }
        Ok(BigRational::new(parse_int(num)?, den))
    } else {
        Ok(BigRational::from_integer(parse_int(s)?))
    }
}
