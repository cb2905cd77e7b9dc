//! Semi-algebraic formulas over `Q_p^m`: polynomial equalities and power
//! predicates (the pure language), an extended layer with valuation and
//! angular-component atoms, three-valued evaluation at p-adic points, and the
//! lowering pass that rewrites every extended atom into the pure language.

mod lower;
mod poly;
pub mod text;

pub use lower::{lower, LowerError};
pub use poly::Polynomial;

use std::fmt;

use crate::padic::{PAdicError, PAdicNumber, UnitResidue, Valuation};

/// Congruence on a weighted sum of coordinate valuations:
/// `sum_j coeffs[j] * ord(y_j) + shift ≡ residue (mod modulus)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrdCong {
    coeffs: Vec<i64>,
    shift: i64,
    residue: i64,
    modulus: u64,
}

impl OrdCong {
    pub fn new(coeffs: Vec<i64>, shift: i64, residue: i64, modulus: u64) -> Self {
        assert!(modulus >= 2, "congruence modulus must be at least 2");
        let residue = residue.rem_euclid(modulus as i64);
        OrdCong {
            coeffs,
            shift,
            residue,
            modulus,
        }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn residue(&self) -> i64 {
        self.residue
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

/// Semi-algebraic formula AST.
///
/// `PolyEq` and `PowerPred` are the pure atoms; `OrdLe`, `OrdCong` and `AcEq`
/// are the extended atoms that [`lower`] rewrites into pure ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SemiAlgFormula {
    True,
    False,
    /// `f(y) = 0`
    PolyEq(Polynomial),
    /// `exists z: f(y) = z^n`, with `n >= 2`
    PowerPred(u64, Polynomial),
    /// `ord f(y) <= ord g(y)`
    OrdLe(Polynomial, Polynomial),
    /// weighted valuation congruence
    OrdCong(OrdCong),
    /// `ac(y_j) = c mod p^M` (coordinate index is 0-based)
    AcEq(usize, UnitResidue),
    Not(Box<SemiAlgFormula>),
    And(Vec<SemiAlgFormula>),
    Or(Vec<SemiAlgFormula>),
}

impl SemiAlgFormula {
    pub fn power_pred(n: u64, f: Polynomial) -> Self {
        assert!(n >= 2, "power predicates need n >= 2");
        SemiAlgFormula::PowerPred(n, f)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: SemiAlgFormula) -> Self {
        SemiAlgFormula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<SemiAlgFormula>) -> Self {
        SemiAlgFormula::And(fs)
    }

    pub fn or(fs: Vec<SemiAlgFormula>) -> Self {
        SemiAlgFormula::Or(fs)
    }

    /// Whether only pure atoms (polynomial equalities and power predicates)
    /// occur.
    pub fn is_pure(&self) -> bool {
        match self {
            SemiAlgFormula::True | SemiAlgFormula::False => true,
            SemiAlgFormula::PolyEq(_) | SemiAlgFormula::PowerPred(..) => true,
            SemiAlgFormula::OrdLe(..) | SemiAlgFormula::OrdCong(_) | SemiAlgFormula::AcEq(..) => {
                false
            }
            SemiAlgFormula::Not(f) => f.is_pure(),
            SemiAlgFormula::And(fs) | SemiAlgFormula::Or(fs) => fs.iter().all(|f| f.is_pure()),
        }
    }

    pub fn node_count(&self) -> u64 {
        match self {
            SemiAlgFormula::Not(f) => 1 + f.node_count(),
            SemiAlgFormula::And(fs) | SemiAlgFormula::Or(fs) => {
                1 + fs.iter().map(|f| f.node_count()).sum::<u64>()
            }
            _ => 1,
        }
    }
}

/// Outcome of evaluating a formula at a point: Kleene three-valued, with
/// `Insufficient` marking that some needed atom could not be decided at the
/// available precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalOutcome {
    True,
    False,
    Insufficient,
}

impl EvalOutcome {
    fn from_bool(b: bool) -> Self {
        if b {
            EvalOutcome::True
        } else {
            EvalOutcome::False
        }
    }

    fn negate(self) -> Self {
        match self {
            EvalOutcome::True => EvalOutcome::False,
            EvalOutcome::False => EvalOutcome::True,
            EvalOutcome::Insufficient => EvalOutcome::Insufficient,
        }
    }

    pub fn decided(self) -> Option<bool> {
        match self {
            EvalOutcome::True => Some(true),
            EvalOutcome::False => Some(false),
            EvalOutcome::Insufficient => None,
        }
    }
}

impl fmt::Display for EvalOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalOutcome::True => write!(f, "true"),
            EvalOutcome::False => write!(f, "false"),
            EvalOutcome::Insufficient => write!(f, "insufficient precision"),
        }
    }
}

/// Evaluate a formula at a point whose coordinates carry at least `prec`
/// digits. Never guesses: precision loss in any needed atom yields
/// `Insufficient` rather than a boolean.
pub fn evaluate_formula(
    formula: &SemiAlgFormula,
    point: &[PAdicNumber],
    p: u64,
    prec: u32,
) -> EvalOutcome {
    if point
        .iter()
        .any(|y| y.prime() != p || y.effective_precision() < prec)
    {
        return EvalOutcome::Insufficient;
    }
    eval_rec(formula, point, p, prec)
}

fn eval_rec(formula: &SemiAlgFormula, point: &[PAdicNumber], p: u64, prec: u32) -> EvalOutcome {
    match formula {
        SemiAlgFormula::True => EvalOutcome::True,
        SemiAlgFormula::False => EvalOutcome::False,
        SemiAlgFormula::PolyEq(f) => match f.evaluate(point, p, prec) {
            Ok(v) => EvalOutcome::from_bool(v.is_exact_zero()),
            Err(PAdicError::PrecisionLoss) => EvalOutcome::Insufficient,
            Err(e) => unreachable!("polynomial evaluation failed: {e}"),
        },
        SemiAlgFormula::PowerPred(n, f) => match f.evaluate(point, p, prec) {
            Ok(v) => match v.is_nth_power(*n) {
                Ok(b) => EvalOutcome::from_bool(b),
                Err(PAdicError::InsufficientPrecision { .. }) => EvalOutcome::Insufficient,
                Err(e) => unreachable!("power test failed: {e}"),
            },
            Err(PAdicError::PrecisionLoss) => EvalOutcome::Insufficient,
            Err(e) => unreachable!("polynomial evaluation failed: {e}"),
        },
        SemiAlgFormula::OrdLe(f, g) => {
            let vf = match f.evaluate(point, p, prec) {
                Ok(v) => v.ord(),
                Err(PAdicError::PrecisionLoss) => return EvalOutcome::Insufficient,
                Err(e) => unreachable!("polynomial evaluation failed: {e}"),
            };
            let vg = match g.evaluate(point, p, prec) {
                Ok(v) => v.ord(),
                Err(PAdicError::PrecisionLoss) => return EvalOutcome::Insufficient,
                Err(e) => unreachable!("polynomial evaluation failed: {e}"),
            };
            let le = match (vf, vg) {
                (Valuation::Finite(a), Valuation::Finite(b)) => a <= b,
                (Valuation::Infinite, _) => matches!(vg, Valuation::Infinite),
                (Valuation::Finite(_), Valuation::Infinite) => true,
            };
            EvalOutcome::from_bool(le)
        }
        SemiAlgFormula::OrdCong(cong) => {
            let mut total: i64 = cong.shift();
            for (j, &c) in cong.coeffs().iter().enumerate() {
                if c == 0 {
                    continue;
                }
                match point[j].ord() {
                    Valuation::Finite(v) => {
                        total = total
                            .checked_add(c.checked_mul(v).expect("valuation overflow"))
                            .expect("valuation overflow");
                    }
                    // A zero coordinate lies in no congruence class.
                    Valuation::Infinite => return EvalOutcome::False,
                }
            }
            EvalOutcome::from_bool(total.rem_euclid(cong.modulus() as i64) == cong.residue())
        }
        SemiAlgFormula::AcEq(j, c) => {
            let y = &point[*j];
            if y.is_exact_zero() {
                return EvalOutcome::False;
            }
            match y.ac_mod(c.modulus_exp()) {
                Ok(ac) => EvalOutcome::from_bool(ac.value() == c.value()),
                Err(PAdicError::InsufficientPrecision { .. }) => EvalOutcome::Insufficient,
                Err(e) => unreachable!("angular component failed: {e}"),
            }
        }
        SemiAlgFormula::Not(f) => eval_rec(f, point, p, prec).negate(),
        SemiAlgFormula::And(fs) => {
            let mut out = EvalOutcome::True;
            for f in fs {
                match eval_rec(f, point, p, prec) {
                    EvalOutcome::False => return EvalOutcome::False,
                    EvalOutcome::Insufficient => out = EvalOutcome::Insufficient,
                    EvalOutcome::True => {}
                }
            }
            out
        }
        SemiAlgFormula::Or(fs) => {
            let mut out = EvalOutcome::False;
            for f in fs {
                match eval_rec(f, point, p, prec) {
                    EvalOutcome::True => return EvalOutcome::True,
                    EvalOutcome::Insufficient => out = EvalOutcome::Insufficient,
                    EvalOutcome::False => {}
                }
            }
            out
        }
    }
}

/// Encode `ord f(y) <= ord g(y)` as a pure power predicate:
/// `f^2 + p g^2` is a square for odd `p`, `f^2 + 8 g^2` for `p = 2`.
pub fn encode_ord_compare(f: &Polynomial, g: &Polynomial, p: u64) -> SemiAlgFormula {
    assert_eq!(f.dim(), g.dim(), "dimension mismatch");
    let weight = if p == 2 { 8 } else { p as i64 };
    let poly = f.pow(2).add(
        &g.pow(2)
            .scale(&num_rational::BigRational::from_integer(weight.into())),
    );
    SemiAlgFormula::power_pred(2, poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(num: i64, p: u64, prec: u32) -> PAdicNumber {
        PAdicNumber::from_integer(num, p, prec).unwrap()
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn power_pred_at_square() {
        let f = SemiAlgFormula::power_pred(2, Polynomial::var(1, 0));
        assert_eq!(evaluate_formula(&f, &[q(4, 5, 8)], 5, 4), EvalOutcome::True);
        assert_eq!(
            evaluate_formula(&f, &[q(2, 5, 8)], 5, 4),
            EvalOutcome::False
        );
    }

    #[test]
    fn poly_eq_at_exact_point() {
        let f = SemiAlgFormula::PolyEq(
            Polynomial::var(1, 0).sub(&Polynomial::constant(1, rat(1))),
        );
        assert_eq!(evaluate_formula(&f, &[q(1, 5, 8)], 5, 4), EvalOutcome::True);
        assert_eq!(
            evaluate_formula(&f, &[q(3, 5, 8)], 5, 4),
            EvalOutcome::False
        );
    }

    #[test]
    fn poly_eq_at_inexact_point_is_insufficient() {
        use num_bigint::BigUint;
        let f = SemiAlgFormula::PolyEq(
            Polynomial::var(1, 0).sub(&Polynomial::constant(1, rat(1))),
        );
        // y known only as 1 + O(5^4): y - 1 cancels entirely.
        let y = PAdicNumber::from_unit_class(5, 0, BigUint::from(1u32), 4).unwrap();
        assert_eq!(
            evaluate_formula(&f, &[y], 5, 4),
            EvalOutcome::Insufficient
        );
    }

    #[test]
    fn ac_atom() {
        // 100 = 4 * 25: angular component 4 mod 5.
        let c = UnitResidue::new(5, 1, 4u32.into()).unwrap();
        let f = SemiAlgFormula::AcEq(0, c);
        assert_eq!(
            evaluate_formula(&f, &[q(100, 5, 8)], 5, 4),
            EvalOutcome::True
        );
        assert_eq!(
            evaluate_formula(&f, &[q(75, 5, 8)], 5, 4),
            EvalOutcome::False
        );
    }

    #[test]
    fn ord_cong_atom() {
        let f = SemiAlgFormula::OrdCong(OrdCong::new(vec![1], 0, 0, 2));
        assert_eq!(
            evaluate_formula(&f, &[q(25, 5, 8)], 5, 4),
            EvalOutcome::True
        );
        assert_eq!(
            evaluate_formula(&f, &[q(5, 5, 8)], 5, 4),
            EvalOutcome::False
        );
        let zero = PAdicNumber::zero(5).unwrap();
        assert_eq!(evaluate_formula(&f, &[zero], 5, 1), EvalOutcome::False);
    }

    #[test]
    fn square_trick_examples() {
        // constants f = 1, g = 5: 1 + 5*25 = 126 ≡ 1 mod 5 is a square.
        let one = Polynomial::constant(0, rat(1));
        let five = Polynomial::constant(0, rat(5));
        let f = encode_ord_compare(&one, &five, 5);
        assert_eq!(evaluate_formula(&f, &[], 5, 30), EvalOutcome::True);

        // f = 5, g = 1: 25 + 5 = 30 has odd valuation, not a square.
        let f = encode_ord_compare(&five, &one, 5);
        assert_eq!(evaluate_formula(&f, &[], 5, 30), EvalOutcome::False);

        // f = g = 0: encoded value 0, a square; ord inf <= ord inf.
        let zero = Polynomial::zero(0);
        let f = encode_ord_compare(&zero, &zero, 5);
        assert_eq!(evaluate_formula(&f, &[], 5, 30), EvalOutcome::True);
    }

    #[test]
    fn kleene_connectives() {
        use num_bigint::BigUint;
        let insufficient = SemiAlgFormula::PolyEq(
            Polynomial::var(1, 0).sub(&Polynomial::constant(1, rat(1))),
        );
        let yes = SemiAlgFormula::True;
        let no = SemiAlgFormula::False;
        let y = PAdicNumber::from_unit_class(5, 0, BigUint::from(1u32), 4).unwrap();
        let point = [y];

        // false and insufficient = false
        let f = SemiAlgFormula::and(vec![no.clone(), insufficient.clone()]);
        assert_eq!(evaluate_formula(&f, &point, 5, 4), EvalOutcome::False);
        // true or insufficient = true
        let f = SemiAlgFormula::or(vec![yes, insufficient.clone()]);
        assert_eq!(evaluate_formula(&f, &point, 5, 4), EvalOutcome::True);
        // true and insufficient = insufficient
        let f = SemiAlgFormula::and(vec![SemiAlgFormula::True, insufficient]);
        assert_eq!(
            evaluate_formula(&f, &point, 5, 4),
            EvalOutcome::Insufficient
        );
    }
}
