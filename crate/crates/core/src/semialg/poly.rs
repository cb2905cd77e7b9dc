//! Multivariate polynomials with exact rational coefficients over the
//! coordinates `y1, .., ym`, evaluated at p-adic points.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::padic::{self, PAdicNumber};

/// Canonical form: sorted exponent vectors, no zero coefficients. The
/// dimension (number of coordinates) is fixed per polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; dim], c);
        }
        Polynomial { dim, terms }
    }

    pub fn constant_i64(dim: usize, c: i64) -> Self {
        Self::constant(dim, BigRational::from_integer(BigInt::from(c)))
    }

    /// The coordinate `y_{index+1}`.
    pub fn var(dim: usize, index: usize) -> Self {
        assert!(index < dim, "variable index out of range");
        let mut exps = vec![0; dim];
        exps[index] = 1;
        Self::monomial(dim, exps, BigRational::one())
    }

    pub fn monomial(dim: usize, exps: Vec<u32>, coeff: BigRational) -> Self {
        assert_eq!(exps.len(), dim);
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exps, coeff);
        }
        Polynomial { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(e.clone()).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(e);
            }
        }
        Polynomial { dim: self.dim, terms }
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c * k))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = Self::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea
                    .iter()
                    .zip(eb)
                    .map(|(a, b)| a.checked_add(*b).expect("exponent overflow"))
                    .collect();
                out = out.add(&Self::monomial(self.dim, exps, ca * cb));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.dim, BigRational::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Least common multiple of the coefficient denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// The polynomial scaled by its common denominator: integer coefficients.
    pub fn cleared(&self) -> Self {
        let d = self.common_denominator();
        if d.is_one() {
            self.clone()
        } else {
            self.scale(&BigRational::from_integer(d))
        }
    }

    pub fn has_integer_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.denom().is_one())
    }

    /// Evaluate at a p-adic point. Precision follows the operand rules of the
    /// underlying arithmetic; cancellation surfaces as `PrecisionLoss`.
    pub fn evaluate(&self, point: &[PAdicNumber], p: u64, prec: u32) -> padic::Result<PAdicNumber> {
        assert_eq!(point.len(), self.dim, "point dimension mismatch");
        let mut acc = PAdicNumber::zero(p)?;
        for (exps, coeff) in &self.terms {
            let mut term = PAdicNumber::from_big_rational(coeff.clone(), p, prec)?;
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&point[i].pow(e as i64)?)?;
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest-degree terms first reads more naturally
        let mut first = true;
        for (exps, coeff) in self.terms.iter().rev() {
            let neg = coeff.is_negative();
            let abs = if neg { -coeff.clone() } else { coeff.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let vars: Vec<String> = exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("y{}", i + 1)
                    } else {
                        format!("y{}^{}", i + 1, e)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", abs, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn arithmetic_and_canonical_form() {
        let y1 = Polynomial::var(2, 0);
        let y2 = Polynomial::var(2, 1);
        let f = y1.add(&y2).mul(&y1.sub(&y2)); // y1^2 - y2^2
        let g = y1.pow(2).sub(&y2.pow(2));
        assert_eq!(f, g);
        assert!(f.sub(&g).is_zero());
    }

    #[test]
    fn evaluate_at_exact_point() {
        // f = y^2 + 1 at y = 2 in Q_5: 5, so ord 1.
        let y = Polynomial::var(1, 0);
        let f = y.pow(2).add(&Polynomial::constant(1, rat(1)));
        let point = [PAdicNumber::from_integer(2, 5, 8).unwrap()];
        let v = f.evaluate(&point, 5, 8).unwrap();
        assert_eq!(v.exact_value().unwrap(), &rat(5));
    }

    #[test]
    fn clearing_denominators() {
        let f = Polynomial::monomial(1, vec![1], BigRational::new(BigInt::from(1), BigInt::from(6)))
            .add(&Polynomial::constant(1, BigRational::new(BigInt::from(1), BigInt::from(4))));
        assert_eq!(f.common_denominator(), BigInt::from(12));
        assert!(f.cleared().has_integer_coefficients());
    }

    #[test]
    fn display_is_readable() {
        let y1 = Polynomial::var(2, 0);
        let y2 = Polynomial::var(2, 1);
        let f = y1.pow(2).sub(&y2.scale(&rat(3))).add(&Polynomial::constant(2, rat(1)));
        assert_eq!(format!("{f}"), "y1^2 - 3*y2 + 1");
    }
}
