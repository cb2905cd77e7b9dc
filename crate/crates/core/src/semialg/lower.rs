//! Rewriting extended atoms into the pure language of polynomial equalities
//! and power predicates.
//!
//! - `ord f <= ord g` becomes a single square predicate on `f^2 + p g^2`
//!   (`f^2 + 8 g^2` for `p = 2`), after clearing coefficient denominators.
//! - `ac(y_j) = c mod p^M` becomes a disjunction of power predicates
//!   `P_n(y_j * (c p^a)^{n-1})` over `a = 0, .., n-1`, where `n` is the index
//!   for which the n-th powers of units are exactly `1 + p^M Z_p`.
//! - A valuation congruence becomes a disjunction over coset representatives
//!   of n-th powers.
//!
//! Division is eliminated through `P_s(a/b) <=> P_s(a b^{s-1})`, and monomial
//! coefficients are reduced modulo `p^K` (unit part) and modulo `s` (p-power
//! exponent), which preserves the power class of every nonzero value. The
//! lowered formula is evaluation-equivalent to the input at every point whose
//! relevant coordinates are nonzero.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use thiserror::Error;

use super::{encode_ord_compare, OrdCong, Polynomial, SemiAlgFormula};
use crate::padic::{self, UnitResidue};
use crate::unitgroup::{self, UnitGroupError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LowerError {
    #[error("for p = 2 the angular modulus exponent must be at least 3, got {0}")]
    ModulusTooSmall(u32),
    #[error("angular residue is modulo a power of {0}, but lowering is over Q_{1}")]
    PrimeMismatch(u64, u64),
    #[error("power index p^{0} overflows")]
    ExponentTooLarge(u32),
    #[error(transparent)]
    UnitGroup(#[from] UnitGroupError),
}

pub type Result<T> = std::result::Result<T, LowerError>;

/// Rewrite every extended atom of `formula` into pure atoms. `dim` is the
/// number of coordinates `y_1, .., y_dim`.
pub fn lower(formula: &SemiAlgFormula, p: u64, dim: usize) -> Result<SemiAlgFormula> {
    Ok(match formula {
        SemiAlgFormula::True
        | SemiAlgFormula::False
        | SemiAlgFormula::PolyEq(_)
        | SemiAlgFormula::PowerPred(..) => formula.clone(),
        SemiAlgFormula::OrdLe(f, g) => {
            let d = num_integer::Integer::lcm(&f.common_denominator(), &g.common_denominator());
            let scale = BigRational::from_integer(d);
            encode_ord_compare(&f.scale(&scale), &g.scale(&scale), p)
        }
        SemiAlgFormula::AcEq(j, c) => lower_ac(*j, c, p, dim)?,
        SemiAlgFormula::OrdCong(cong) => lower_ord_cong(cong, p, dim)?,
        SemiAlgFormula::Not(f) => SemiAlgFormula::not(lower(f, p, dim)?),
        SemiAlgFormula::And(fs) => SemiAlgFormula::and(
            fs.iter().map(|f| lower(f, p, dim)).collect::<Result<_>>()?,
        ),
        SemiAlgFormula::Or(fs) => SemiAlgFormula::or(
            fs.iter().map(|f| lower(f, p, dim)).collect::<Result<_>>()?,
        ),
    })
}

/// The power index whose n-th powers of units are exactly `1 + p^M Z_p`:
/// `n = p^(M-1) (p-1)` for odd p, `n = 2^(M-2)` for `p = 2` (needs `M >= 3`).
fn unit_ball_power_index(p: u64, m: u32) -> Result<u64> {
    if p == 2 {
        if m < 3 {
            return Err(LowerError::ModulusTooSmall(m));
        }
        return 1u64
            .checked_shl(m - 2)
            .ok_or(LowerError::ExponentTooLarge(m - 2));
    }
    let mut n: u64 = p - 1;
    for _ in 0..m - 1 {
        n = n.checked_mul(p).ok_or(LowerError::ExponentTooLarge(m - 1))?;
    }
    Ok(n)
}

/// `ac_M(y_j) = c` as the disjunction over `a` of `P_n(y_j (c p^a)^{n-1})`.
/// The coefficient is stored reduced: its unit part modulo `p^K` with
/// `K = 2 ord_p(n) + 1`, and its p-power exponent modulo `n`, neither of
/// which changes the power class of the product.
fn lower_ac(j: usize, c: &UnitResidue, p: u64, dim: usize) -> Result<SemiAlgFormula> {
    if c.prime() != p {
        return Err(LowerError::PrimeMismatch(c.prime(), p));
    }
    let m = c.modulus_exp();
    let n = unit_ball_power_index(p, m)?;
    let k = 2 * padic::int_ord_u64(n, p) as u32 + 1;
    let q = BigUint::from(p).pow(k);
    // c^(n-1) mod p^K
    let unit_factor = c.value().modpow(&BigUint::from(n - 1), &q);

    let mut disjuncts = Vec::with_capacity(n as usize);
    for a in 0..n {
        // p-exponent of (p^a)^(n-1), reduced mod n
        let v = (a % n) * ((n - 1) % n) % n;
        let coeff = BigInt::from(unit_factor.clone()) * BigInt::from(p).pow(v as u32);
        let mut exps = vec![0u32; dim];
        exps[j] = 1;
        let poly = Polynomial::monomial(dim, exps, BigRational::from_integer(coeff));
        disjuncts.push(SemiAlgFormula::power_pred(n, poly));
    }
    Ok(SemiAlgFormula::or(disjuncts))
}

/// `sum_j coeffs[j] ord(y_j) + shift ≡ r (mod s)` as a disjunction over unit
/// coset representatives `λ` of `P_s(N (D λ p^r)^{s-1})`, where `N/D` is the
/// monomial `p^shift prod_j y_j^{coeffs[j]}` split into numerator and
/// denominator.
fn lower_ord_cong(cong: &OrdCong, p: u64, dim: usize) -> Result<SemiAlgFormula> {
    let s = cong.modulus();
    let r = cong.residue() as u64;
    let k = 2 * padic::int_ord_u64(s, p) as u32 + 1;
    let q = BigUint::from(p).pow(k);

    // Split the monomial into numerator / denominator exponents.
    let t = cong.shift();
    let t_pos = t.max(0) as u64;
    let t_neg = (-t).max(0) as u64;
    let mut exps = vec![0u32; dim];
    for (j, &cj) in cong.coeffs().iter().enumerate() {
        let e = if cj >= 0 {
            cj as u64
        } else {
            (s - 1) * cj.unsigned_abs()
        };
        exps[j] = u32::try_from(e).map_err(|_| LowerError::ExponentTooLarge(u32::MAX))?;
    }
    // p-power exponent of N * (p^{t_neg} p^r)^{s-1}, reduced mod s.
    let p_exp = (t_pos + (s - 1) * ((t_neg + r) % s)) % s;

    let reps = unitgroup::nth_power_cosets(p, s)?;
    let mut disjuncts = Vec::new();
    for rep in reps.iter().filter(|rep| rep.p_exp == 0) {
        let lambda_factor = BigUint::from(rep.unit).modpow(&BigUint::from(s - 1), &q);
        let coeff = BigInt::from(lambda_factor) * BigInt::from(p).pow(p_exp as u32);
        let poly = Polynomial::monomial(dim, exps.clone(), BigRational::from_integer(coeff));
        disjuncts.push(SemiAlgFormula::power_pred(s, poly));
    }
    Ok(SemiAlgFormula::or(disjuncts))
}
