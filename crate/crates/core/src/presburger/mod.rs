//! Linear integer arithmetic formulas: representation, evaluation,
//! quantifier elimination, and the feasibility formula for valuation systems
//! `A v = w` with sign constraints.
//!
//! Atoms are `t = 0`, `t >= 0`, and `m | t` over linear terms with integer
//! coefficients; connectives are and/or/not plus existential quantifiers.
//! [`eliminate`] removes quantifiers Cooper-style, producing an equivalent
//! quantifier-free formula in the free variables.

mod eliminate;
pub mod text;

pub use eliminate::{eliminate, eliminate_with, EliminationConfig};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::monomial::{CoordinateTag, MonomialMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresburgerError {
    #[error("formula grew past the resource limit of {0} nodes")]
    ResourceLimit(u64),
    #[error("integer overflow during formula manipulation")]
    Overflow,
    #[error("variable {0} is not bound by the assignment")]
    UnboundVariable(String),
    #[error("formula is not quantifier-free")]
    NotQuantifierFree,
    #[error("divisibility modulus must be at least 2, got {0}")]
    BadModulus(u64),
}

pub type Result<T> = std::result::Result<T, PresburgerError>;

fn checked(v: Option<i64>) -> Result<i64> {
    v.ok_or(PresburgerError::Overflow)
}

/// A linear term `sum c_i * x_i + constant`; zero coefficients are not stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinearTerm {
    coeffs: BTreeMap<String, i64>,
    constant: i64,
}

impl LinearTerm {
    pub fn constant(c: i64) -> Self {
        LinearTerm {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Self::monomial(name, 1)
    }

    pub fn monomial(name: impl Into<String>, coeff: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        if coeff != 0 {
            coeffs.insert(name.into(), coeff);
        }
        LinearTerm { coeffs, constant: 0 }
    }

    pub fn constant_part(&self) -> i64 {
        self.constant
    }

    pub fn coeff(&self, var: &str) -> i64 {
        self.coeffs.get(var).copied().unwrap_or(0)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&str, i64)> {
        self.coeffs.iter().map(|(v, &c)| (v.as_str(), c))
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(|s| s.as_str())
    }

    pub fn is_constant(&self) -> Option<i64> {
        self.coeffs.is_empty().then_some(self.constant)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        for (v, &c) in &other.coeffs {
            let entry = coeffs.entry(v.clone()).or_insert(0);
            *entry = checked(entry.checked_add(c))?;
            if *entry == 0 {
                coeffs.remove(v);
            }
        }
        Ok(LinearTerm {
            coeffs,
            constant: checked(self.constant.checked_add(other.constant))?,
        })
    }

    pub fn add_constant(&self, c: i64) -> Result<Self> {
        let mut t = self.clone();
        t.constant = checked(t.constant.checked_add(c))?;
        Ok(t)
    }

    pub fn scale(&self, k: i64) -> Result<Self> {
        if k == 0 {
            return Ok(Self::constant(0));
        }
        let mut coeffs = BTreeMap::new();
        for (v, &c) in &self.coeffs {
            coeffs.insert(v.clone(), checked(c.checked_mul(k))?);
        }
        Ok(LinearTerm {
            coeffs,
            constant: checked(self.constant.checked_mul(k))?,
        })
    }

    pub fn negate(&self) -> Result<Self> {
        self.scale(-1)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.negate()?)
    }

    /// The term with `var` removed (its coefficient dropped).
    pub fn without_var(&self, var: &str) -> Self {
        let mut t = self.clone();
        t.coeffs.remove(var);
        t
    }

    /// Substitute `replacement` for `var`.
    pub fn subst(&self, var: &str, replacement: &Self) -> Result<Self> {
        let c = self.coeff(var);
        if c == 0 {
            return Ok(self.clone());
        }
        self.without_var(var).add(&replacement.scale(c)?)
    }

    pub fn eval(&self, assignment: &BTreeMap<String, i64>) -> Result<i64> {
        let mut total = self.constant;
        for (v, &c) in &self.coeffs {
            let val = *assignment
                .get(v)
                .ok_or_else(|| PresburgerError::UnboundVariable(v.clone()))?;
            total = checked(total.checked_add(checked(c.checked_mul(val))?))?;
        }
        Ok(total)
    }
}

impl fmt::Display for LinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, &c) in &self.coeffs {
            if first {
                if c == 1 {
                    write!(f, "{v}")?;
                } else if c == -1 {
                    write!(f, "-{v}")?;
                } else {
                    write!(f, "{c}*{v}")?;
                }
                first = false;
            } else if c < 0 {
                if c == -1 {
                    write!(f, " - {v}")?;
                } else {
                    write!(f, " - {}*{v}", -c)?;
                }
            } else if c == 1 {
                write!(f, " + {v}")?;
            } else {
                write!(f, " + {c}*{v}")?;
            }
        }
        if first {
            write!(f, "{}", self.constant)?;
        } else if self.constant > 0 {
            write!(f, " + {}", self.constant)?;
        } else if self.constant < 0 {
            write!(f, " - {}", -self.constant)?;
        }
        Ok(())
    }
}

/// Atomic formula over linear terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    /// `term = 0`
    Eq(LinearTerm),
    /// `term >= 0`
    Geq(LinearTerm),
    /// `modulus | term` with `modulus >= 2`
    Divides(u64, LinearTerm),
}

impl Atom {
    pub fn eval(&self, assignment: &BTreeMap<String, i64>) -> Result<bool> {
        match self {
            Atom::Eq(t) => Ok(t.eval(assignment)? == 0),
            Atom::Geq(t) => Ok(t.eval(assignment)? >= 0),
            Atom::Divides(m, t) => Ok(t.eval(assignment)?.rem_euclid(*m as i64) == 0),
        }
    }

    fn fold(&self) -> Option<bool> {
        match self {
            Atom::Eq(t) => t.is_constant().map(|c| c == 0),
            Atom::Geq(t) => t.is_constant().map(|c| c >= 0),
            Atom::Divides(m, t) => t.is_constant().map(|c| c.rem_euclid(*m as i64) == 0),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Eq(t) => write!(f, "{t} = 0"),
            Atom::Geq(t) => write!(f, "{t} >= 0"),
            Atom::Divides(m, t) => write!(f, "{m} | {t}"),
        }
    }
}

/// Formula AST. `And(vec![])` is true and `Or(vec![])` is false; the explicit
/// `True`/`False` constants are kept for readable output.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }

    pub fn eq0(t: LinearTerm) -> Self {
        Formula::Atom(Atom::Eq(t))
    }

    pub fn geq0(t: LinearTerm) -> Self {
        Formula::Atom(Atom::Geq(t))
    }

    pub fn divides(m: u64, t: LinearTerm) -> Result<Self> {
        if m < 2 {
            return Err(PresburgerError::BadModulus(m));
        }
        Ok(Formula::Atom(Atom::Divides(m, t)))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Self {
        Formula::And(fs)
    }

    pub fn or(fs: Vec<Formula>) -> Self {
        Formula::Or(fs)
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(|f| f.is_quantifier_free()),
            Formula::Exists(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn walk(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::True | Formula::False => {}
                Formula::Atom(a) => {
                    let t = match a {
                        Atom::Eq(t) | Atom::Geq(t) | Atom::Divides(_, t) => t,
                    };
                    for v in t.vars() {
                        if !bound.iter().any(|b| b == v) {
                            out.insert(v.to_string());
                        }
                    }
                }
                Formula::Not(g) => walk(g, bound, out),
                Formula::And(fs) | Formula::Or(fs) => {
                    for g in fs {
                        walk(g, bound, out);
                    }
                }
                Formula::Exists(v, g) => {
                    bound.push(v.clone());
                    walk(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn node_count(&self) -> u64 {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::Not(f) => 1 + f.node_count(),
            Formula::And(fs) | Formula::Or(fs) => {
                1 + fs.iter().map(|f| f.node_count()).sum::<u64>()
            }
            Formula::Exists(_, f) => 1 + f.node_count(),
        }
    }

    /// Standard semantics over the integers; the formula must be
    /// quantifier-free and the assignment must cover all its variables.
    pub fn evaluate(&self, assignment: &BTreeMap<String, i64>) -> Result<bool> {
        match self {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Atom(a) => a.eval(assignment),
            Formula::Not(f) => Ok(!f.evaluate(assignment)?),
            Formula::And(fs) => {
                for f in fs {
                    if !f.evaluate(assignment)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.evaluate(assignment)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Exists(..) => Err(PresburgerError::NotQuantifierFree),
        }
    }

    /// Constant folding, flattening of nested and/or, and duplicate-atom
    /// removal. Deliberately not a canonicalizer.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => match a.fold() {
                Some(true) => Formula::True,
                Some(false) => Formula::False,
                None => self.clone(),
            },
            Formula::Not(f) => match f.simplify() {
                Formula::True => Formula::False,
                Formula::False => Formula::True,
                Formula::Not(inner) => *inner,
                g => Formula::Not(Box::new(g)),
            },
            Formula::And(fs) => {
                let mut out: Vec<Formula> = Vec::new();
                let mut seen = std::collections::HashSet::new();
                for f in fs {
                    match f.simplify() {
                        Formula::True => {}
                        Formula::False => return Formula::False,
                        Formula::And(inner) => {
                            for g in inner {
                                if seen.insert(g.clone()) {
                                    out.push(g);
                                }
                            }
                        }
                        g => {
                            if seen.insert(g.clone()) {
                                out.push(g);
                            }
                        }
                    }
                }
                match out.len() {
                    0 => Formula::True,
                    1 => out.pop().unwrap(),
                    _ => Formula::And(out),
                }
            }
            Formula::Or(fs) => {
                let mut out: Vec<Formula> = Vec::new();
                let mut seen = std::collections::HashSet::new();
                for f in fs {
                    match f.simplify() {
                        Formula::False => {}
                        Formula::True => return Formula::True,
                        Formula::Or(inner) => {
                            for g in inner {
                                if seen.insert(g.clone()) {
                                    out.push(g);
                                }
                            }
                        }
                        g => {
                            if seen.insert(g.clone()) {
                                out.push(g);
                            }
                        }
                    }
                }
                match out.len() {
                    0 => Formula::False,
                    1 => out.pop().unwrap(),
                    _ => Formula::Or(out),
                }
            }
            Formula::Exists(v, f) => match f.simplify() {
                Formula::True => Formula::True,
                Formula::False => Formula::False,
                g => Formula::Exists(v.clone(), Box::new(g)),
            },
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", text::to_sexpr(self))
    }
}

/// The quantifier-free condition on `(w_1, .., w_m)` for the system
/// `A v = w` to have a solution `v` with `v_i >= 0` on `Full` columns and
/// `v_i = 0` on `UnitBall` columns.
pub fn valuation_image_formula(map: &MonomialMap, tags: &[CoordinateTag]) -> Result<Formula> {
    valuation_image_formula_with(map, tags, &EliminationConfig::default())
}

pub fn valuation_image_formula_with(
    map: &MonomialMap,
    tags: &[CoordinateTag],
    config: &EliminationConfig,
) -> Result<Formula> {
    assert_eq!(tags.len(), map.cols(), "one tag per map column");
    let v_name = |i: usize| format!("v{}", i + 1);
    let w_name = |j: usize| format!("w{}", j + 1);

    let mut conjuncts = Vec::new();
    for (i, tag) in tags.iter().enumerate() {
        match tag {
            CoordinateTag::Full => conjuncts.push(Formula::geq0(LinearTerm::var(v_name(i)))),
            CoordinateTag::UnitBall => conjuncts.push(Formula::eq0(LinearTerm::var(v_name(i)))),
        }
    }
    for j in 0..map.rows() {
        let mut t = LinearTerm::monomial(w_name(j), -1);
        for i in 0..map.cols() {
            let a = map.entry(j, i);
            if a != 0 {
                t = t.add(&LinearTerm::monomial(
                    v_name(i),
                    i64::try_from(a).map_err(|_| PresburgerError::Overflow)?,
                ))?;
            }
        }
        conjuncts.push(Formula::eq0(t));
    }
    let mut body = Formula::and(conjuncts);
    for i in (0..map.cols()).rev() {
        body = Formula::exists(v_name(i), body);
    }
    eliminate_with(&body, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assignment(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
        pairs.iter().map(|(v, x)| (v.to_string(), *x)).collect()
    }

    #[test]
    fn evaluate_divides() {
        let f = Formula::divides(2, LinearTerm::var("w")).unwrap();
        assert!(f.evaluate(&assignment(&[("w", 4)])).unwrap());
        assert!(!f.evaluate(&assignment(&[("w", 5)])).unwrap());
        assert!(f.evaluate(&assignment(&[("w", -6)])).unwrap());
    }

    #[test]
    fn evaluate_nonneg_and_not_one() {
        // w >= 0 and w != 1
        let f = Formula::and(vec![
            Formula::geq0(LinearTerm::var("w")),
            Formula::not(Formula::eq0(
                LinearTerm::var("w").add_constant(-1).unwrap(),
            )),
        ]);
        assert!(!f.evaluate(&assignment(&[("w", 1)])).unwrap());
        assert!(f.evaluate(&assignment(&[("w", 0)])).unwrap());
        assert!(f.evaluate(&assignment(&[("w", 2)])).unwrap());
        assert!(!f.evaluate(&assignment(&[("w", -3)])).unwrap());
    }

    #[test]
    fn evaluate_unbound_variable() {
        let f = Formula::geq0(LinearTerm::var("w"));
        assert!(matches!(
            f.evaluate(&assignment(&[("z", 0)])),
            Err(PresburgerError::UnboundVariable(_))
        ));
    }

    #[test]
    fn simplify_folds_constants() {
        let f = Formula::and(vec![
            Formula::geq0(LinearTerm::constant(3)),
            Formula::eq0(LinearTerm::var("w")),
            Formula::eq0(LinearTerm::var("w")),
        ]);
        assert_eq!(f.simplify(), Formula::eq0(LinearTerm::var("w")));

        let f = Formula::or(vec![
            Formula::geq0(LinearTerm::constant(-1)),
            Formula::False,
        ]);
        assert_eq!(f.simplify(), Formula::False);
    }

    #[test]
    fn free_vars_respect_binding() {
        let f = Formula::exists(
            "v",
            Formula::and(vec![
                Formula::geq0(LinearTerm::var("v")),
                Formula::eq0(LinearTerm::var("w").sub(&LinearTerm::var("v")).unwrap()),
            ]),
        );
        let fv = f.free_vars();
        assert!(fv.contains("w"));
        assert!(!fv.contains("v"));
    }

    #[test]
    fn term_arithmetic() {
        let t = LinearTerm::monomial("x", 2)
            .add(&LinearTerm::monomial("x", -2))
            .unwrap();
        assert_eq!(t.is_constant(), Some(0));
        let t = LinearTerm::monomial("x", 3)
            .subst("x", &LinearTerm::var("y").add_constant(1).unwrap())
            .unwrap();
        assert_eq!(t.coeff("y"), 3);
        assert_eq!(t.constant_part(), 3);
    }
}
