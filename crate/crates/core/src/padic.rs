//! Precision-tracked arithmetic in the field of p-adic numbers.
//!
//! A nonzero value is stored as `p^v * (u + O(p^N))` with `u` a unit residue
//! modulo `p^N`. Values constructed from rationals additionally remember the
//! rational itself, so arithmetic among them stays exact and can produce an
//! exact zero; everything else carries only its truncated class and can never
//! silently pretend to be zero.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Largest modulus `p^k` we are willing to enumerate unit residues for.
pub const ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PAdicError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("full cancellation: result indistinguishable from zero at the available precision")]
    PrecisionLoss,
    #[error("zero has no angular component")]
    ZeroHasNoAngularComponent,
    #[error("insufficient precision: need {needed} digits, have {available}")]
    InsufficientPrecision { needed: u32, available: u32 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("modulus {p}^{exp} exceeds the enumeration cap")]
    CapExceeded { p: u64, exp: u32 },
    #[error("{0} is not a prime")]
    InvalidPrime(u64),
    #[error("precision must be at least 1")]
    ZeroPrecision,
}

pub type Result<T> = std::result::Result<T, PAdicError>;

/// The valuation `ord_p`, with `Infinite` reserved for exact zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// A unit residue class `c mod p^M` with `gcd(c, p) = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnitResidue {
    p: u64,
    modulus_exp: u32,
    value: BigUint,
}

impl UnitResidue {
    pub fn new(p: u64, modulus_exp: u32, value: BigUint) -> Result<Self> {
        check_prime(p)?;
        if modulus_exp == 0 {
            return Err(PAdicError::ZeroPrecision);
        }
        let modulus = BigUint::from(p).pow(modulus_exp);
        let value = value % &modulus;
        if (&value % p).is_zero() {
            return Err(PAdicError::PreconditionViolated(format!(
                "{value} is not a unit modulo {p}^{modulus_exp}"
            )));
        }
        Ok(UnitResidue { p, modulus_exp, value })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn modulus_exp(&self) -> u32 {
        self.modulus_exp
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// The residue as a `u64`; valid whenever `p^M` is below the enumeration cap.
    pub fn value_u64(&self) -> u64 {
        self.value.to_u64().expect("unit residue exceeds u64")
    }
}

impl fmt::Display for UnitResidue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.value, self.p, self.modulus_exp)
    }
}

#[derive(Debug, Clone)]
enum Data {
    /// Exact rational value; `val` caches its valuation. `prec` is the nominal
    /// working precision used when the value is truncated.
    Exact {
        value: BigRational,
        val: Valuation,
        prec: u32,
    },
    /// Truncated class `p^val * (unit + O(p^prec))`, `unit` in `[1, p^prec)`, `p∤unit`.
    Approx { val: i64, unit: BigUint, prec: u32 },
}

/// A truncation-aware p-adic number.
#[derive(Debug, Clone)]
pub struct PAdicNumber {
    p: u64,
    data: Data,
}

impl PAdicNumber {
    /// Canonical representation of `numerator / denominator` in `Q_p`,
    /// truncated to `prec` significant digits but remembered exactly.
    pub fn from_rational(numerator: &BigInt, denominator: &BigInt, p: u64, prec: u32) -> Result<Self> {
        check_prime(p)?;
        if prec == 0 {
            return Err(PAdicError::ZeroPrecision);
        }
        if denominator.is_zero() {
            return Err(PAdicError::DivisionByZero);
        }
        let value = BigRational::new(numerator.clone(), denominator.clone());
        Self::from_big_rational(value, p, prec)
    }

    pub fn from_big_rational(value: BigRational, p: u64, prec: u32) -> Result<Self> {
        check_prime(p)?;
        if prec == 0 {
            return Err(PAdicError::ZeroPrecision);
        }
        let val = rational_ord(&value, p);
        Ok(PAdicNumber {
            p,
            data: Data::Exact { value, val, prec },
        })
    }

    pub fn from_integer(n: i64, p: u64, prec: u32) -> Result<Self> {
        Self::from_rational(&BigInt::from(n), &BigInt::one(), p, prec)
    }

    /// Exact zero: the distinguished value with `ord = Infinite`.
    pub fn zero(p: u64) -> Result<Self> {
        Self::from_rational(&BigInt::zero(), &BigInt::one(), p, 1)
    }

    pub fn one(p: u64, prec: u32) -> Result<Self> {
        Self::from_rational(&BigInt::one(), &BigInt::one(), p, prec)
    }

    /// An inexact value known only through its class `p^val * (unit + O(p^prec))`.
    pub fn from_unit_class(p: u64, val: i64, unit: BigUint, prec: u32) -> Result<Self> {
        check_prime(p)?;
        if prec == 0 {
            return Err(PAdicError::ZeroPrecision);
        }
        let modulus = BigUint::from(p).pow(prec);
        let unit = unit % &modulus;
        if (&unit % p).is_zero() {
            return Err(PAdicError::PreconditionViolated(format!(
                "unit part {unit} is divisible by {p}"
            )));
        }
        Ok(PAdicNumber {
            p,
            data: Data::Approx { val, unit, prec },
        })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Number of significant digits tracked for the unit part.
    pub fn precision(&self) -> u32 {
        match &self.data {
            Data::Exact { prec, .. } => *prec,
            Data::Approx { prec, .. } => *prec,
        }
    }

    /// Precision available for deciding congruences: unlimited for exact values.
    pub fn effective_precision(&self) -> u32 {
        match &self.data {
            Data::Exact { .. } => u32::MAX,
            Data::Approx { prec, .. } => *prec,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.data, Data::Exact { .. })
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(&self.data, Data::Exact { value, .. } if value.is_zero())
    }

    pub fn exact_value(&self) -> Option<&BigRational> {
        match &self.data {
            Data::Exact { value, .. } => Some(value),
            Data::Approx { .. } => None,
        }
    }

    /// `ord_p` of the value; `Infinite` for exact zero.
    pub fn ord(&self) -> Valuation {
        match &self.data {
            Data::Exact { val, .. } => *val,
            Data::Approx { val, .. } => Valuation::Finite(*val),
        }
    }

    /// The unit part modulo `p^m`, i.e. the angular component at that modulus.
    pub fn unit_mod(&self, m: u32) -> Result<BigUint> {
        if m == 0 {
            return Err(PAdicError::ZeroPrecision);
        }
        match &self.data {
            Data::Exact { value, .. } => {
                if value.is_zero() {
                    return Err(PAdicError::ZeroHasNoAngularComponent);
                }
                Ok(rational_unit_mod(value, self.p, m))
            }
            Data::Approx { unit, prec, .. } => {
                if *prec < m {
                    return Err(PAdicError::InsufficientPrecision {
                        needed: m,
                        available: *prec,
                    });
                }
                Ok(unit % BigUint::from(self.p).pow(m))
            }
        }
    }

    /// Angular component modulo `p^m` as a checked `UnitResidue`.
    pub fn ac_mod(&self, m: u32) -> Result<UnitResidue> {
        let value = self.unit_mod(m)?;
        UnitResidue::new(self.p, m, value)
    }

    /// The class `(v, u mod p^prec)` of a nonzero value, re-truncating exact ones.
    pub fn to_class(&self, prec: u32) -> Result<(i64, BigUint)> {
        let v = match self.ord() {
            Valuation::Finite(v) => v,
            Valuation::Infinite => return Err(PAdicError::ZeroHasNoAngularComponent),
        };
        Ok((v, self.unit_mod(prec)?))
    }

    fn check_same_prime(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(PAdicError::PrimeMismatch(self.p, other.p));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        match (&self.data, &other.data) {
            (Data::Exact { value: a, prec: pa, .. }, Data::Exact { value: b, prec: pb, .. }) => {
                Self::from_big_rational(a * b, self.p, (*pa).min(*pb))
            }
            _ => {
                if self.is_exact_zero() || other.is_exact_zero() {
                    return PAdicNumber::zero(self.p);
                }
                let prec = self
                    .effective_precision()
                    .min(other.effective_precision());
                let va = self.ord().finite().expect("nonzero");
                let vb = other.ord().finite().expect("nonzero");
                let modulus = BigUint::from(self.p).pow(prec);
                let unit = (self.unit_mod(prec)? * other.unit_mod(prec)?) % &modulus;
                PAdicNumber::from_unit_class(self.p, add_val(va, vb), unit, prec)
            }
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match &self.data {
            Data::Exact { value, prec, .. } => {
                if value.is_zero() {
                    return Err(PAdicError::DivisionByZero);
                }
                Self::from_big_rational(value.recip(), self.p, *prec)
            }
            Data::Approx { val, unit, prec } => {
                let modulus = BigUint::from(self.p).pow(*prec);
                let unit = inv_mod(unit, &modulus).expect("unit is invertible");
                PAdicNumber::from_unit_class(self.p, -*val, unit, *prec)
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        if other.is_exact_zero() {
            return Err(PAdicError::DivisionByZero);
        }
        self.mul(&other.inv()?)
    }

    /// Integer power; `0^0 = 1` and negative exponents require a nonzero base.
    pub fn pow(&self, k: i64) -> Result<Self> {
        if self.is_exact_zero() {
            return match k.cmp(&0) {
                std::cmp::Ordering::Greater => PAdicNumber::zero(self.p),
                std::cmp::Ordering::Equal => PAdicNumber::one(self.p, 1),
                std::cmp::Ordering::Less => Err(PAdicError::DivisionByZero),
            };
        }
        match &self.data {
            Data::Exact { value, prec, .. } => {
                let a = if k < 0 { value.recip() } else { value.clone() };
                let e = k.unsigned_abs() as u32;
                Self::from_big_rational(rational_pow(&a, e), self.p, *prec)
            }
            Data::Approx { val, unit, prec } => {
                let modulus = BigUint::from(self.p).pow(*prec);
                let base = if k < 0 {
                    inv_mod(unit, &modulus).expect("unit is invertible")
                } else {
                    unit.clone()
                };
                let unit = base.modpow(&BigUint::from(k.unsigned_abs()), &modulus);
                let v = val
                    .checked_mul(k)
                    .expect("valuation overflow in pow");
                PAdicNumber::from_unit_class(self.p, v, unit, *prec)
            }
        }
    }

    pub fn neg(&self) -> Self {
        match &self.data {
            Data::Exact { value, prec, .. } => {
                Self::from_big_rational(-value.clone(), self.p, *prec).expect("valid")
            }
            Data::Approx { val, unit, prec } => {
                let modulus = BigUint::from(self.p).pow(*prec);
                let unit = (&modulus - unit) % &modulus;
                PAdicNumber::from_unit_class(self.p, *val, unit, *prec).expect("valid")
            }
        }
    }

    /// Addition. The result is correct modulo `p^min(v_x+N_x, v_y+N_y)`; if the
    /// sum cannot be distinguished from zero at that bound the operation
    /// reports `PrecisionLoss` instead of inventing a value.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        if let (
            Data::Exact { value: a, prec: pa, .. },
            Data::Exact { value: b, prec: pb, .. },
        ) = (&self.data, &other.data)
        {
            return Self::from_big_rational(a + b, self.p, (*pa).min(*pb));
        }
        if self.is_exact_zero() {
            return Ok(other.clone());
        }
        if other.is_exact_zero() {
            return Ok(self.clone());
        }
        // At least one operand is inexact, both are nonzero.
        let abs_bound = |x: &Self| -> Option<i64> {
            match &x.data {
                Data::Exact { .. } => None,
                Data::Approx { val, prec, .. } => Some(val + *prec as i64),
            }
        };
        let bound = [abs_bound(self), abs_bound(other)]
            .into_iter()
            .flatten()
            .min()
            .expect("at least one inexact operand");
        let va = self.ord().finite().expect("nonzero");
        let vb = other.ord().finite().expect("nonzero");
        let vmin = va.min(vb);
        let len = bound - vmin;
        if len <= 0 {
            return Err(PAdicError::PrecisionLoss);
        }
        let len = u32::try_from(len).expect("precision fits u32");
        let modulus = BigUint::from(self.p).pow(len);
        let big_p = BigUint::from(self.p);
        let term = |x: &Self, v: i64| -> Result<BigUint> {
            let shift = u32::try_from(v - vmin).expect("shift fits u32");
            let avail = x.effective_precision().min(len);
            let u = x.unit_mod(avail)?;
            Ok((u * big_p.pow(shift)) % &modulus)
        };
        let sum = (term(self, va)? + term(other, vb)?) % &modulus;
        if sum.is_zero() {
            return Err(PAdicError::PrecisionLoss);
        }
        let t = biguint_ord(&sum, self.p);
        debug_assert!(t < len as u64);
        let t = t as u32;
        let unit = sum / big_p.pow(t);
        PAdicNumber::from_unit_class(self.p, vmin + t as i64, unit, len - t)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Whether the value is an n-th power in `Q_p` (zero counts, with witness 0).
    ///
    /// For a nonzero value this is decidable from the class modulo
    /// `p^(2*ord_p(n)+1)`: the valuation must be divisible by `n` and the unit
    /// part must land in the image of the n-th power map on units at that
    /// modulus.
    pub fn is_nth_power(&self, n: u64) -> Result<bool> {
        if n == 0 {
            return Err(PAdicError::PreconditionViolated(
                "power index must be at least 1".into(),
            ));
        }
        if self.is_exact_zero() {
            return Ok(true);
        }
        if n == 1 {
            return Ok(true);
        }
        let k = 2 * int_ord_u64(n, self.p) as u32 + 1;
        let v = self.ord().finite().expect("nonzero");
        if self.effective_precision() < k {
            return Err(PAdicError::InsufficientPrecision {
                needed: k,
                available: self.effective_precision(),
            });
        }
        if v.rem_euclid(n as i64) != 0 {
            return Ok(false);
        }
        let unit = self
            .unit_mod(k)?
            .to_u64()
            .expect("residue below enumeration cap");
        let classes = nth_power_unit_classes(self.p, n, k)?;
        Ok(classes[unit as usize])
    }

    /// The unique d-th root of `u` lying in `1 + d·p^e·Z_p`, where
    /// `e = ord_p(u - 1) - 2·ord_p(d)` must be at least 1. Computed by Newton
    /// iteration on `x^d - u`; the divisibility hypothesis guarantees
    /// convergence.
    pub fn hensel_nth_root(u: &PAdicNumber, d: u64, target_prec: u32) -> Result<PAdicNumber> {
        if d == 0 {
            return Err(PAdicError::PreconditionViolated(
                "root index must be at least 1".into(),
            ));
        }
        if target_prec == 0 {
            return Err(PAdicError::ZeroPrecision);
        }
        let p = u.p;
        if u.ord() != Valuation::Finite(0) {
            return Err(PAdicError::PreconditionViolated(format!(
                "input must be a unit, got ord = {}",
                u.ord()
            )));
        }
        let a = int_ord_u64(d, p) as u32;
        if u.effective_precision() < target_prec + a {
            return Err(PAdicError::InsufficientPrecision {
                needed: target_prec + a,
                available: u.effective_precision(),
            });
        }
        // Lower bound for ord_p(u - 1); exact ones give the true valuation.
        let one = PAdicNumber::one(p, u.precision())?;
        let diff_ord = match u.sub(&one) {
            Ok(diff) => match diff.ord() {
                Valuation::Infinite => {
                    // u is exactly 1.
                    return PAdicNumber::one(p, target_prec);
                }
                Valuation::Finite(w) => w,
            },
            // Cancellation of an inexact unit against 1: u ≡ 1 to full precision.
            Err(PAdicError::PrecisionLoss) => u.effective_precision() as i64,
            Err(e) => return Err(e),
        };
        if diff_ord < 2 * a as i64 + 1 {
            return Err(PAdicError::PreconditionViolated(format!(
                "ord_p(u - 1) = {diff_ord} but the root needs at least {}",
                2 * a + 1
            )));
        }
        let e = (diff_ord - 2 * a as i64).min(u32::MAX as i64) as u32;

        // Working precision: enough to pin the root modulo p^target_prec.
        let work = target_prec + 2 * a + 2;
        let avail = u.effective_precision().min(work);
        let modulus = BigInt::from(BigUint::from(p).pow(work));
        let target_value = BigInt::from(u.unit_mod(avail)?);

        let big_p = BigInt::from(p);
        let p_pow_a = big_p.pow(a);
        let d_unit = BigInt::from(d) / &p_pow_a;
        let mut x = BigInt::one();
        for _ in 0..128 {
            let f = (x.modpow(&BigInt::from(d), &modulus) - &target_value).mod_floor(&modulus);
            if f.is_zero() {
                break;
            }
            // delta = f / (d * x^(d-1)), with the p^a factor of d cancelled
            // against f, which the invariant keeps divisible by p^(a+e).
            let f_over_pa = &f / &p_pow_a;
            debug_assert!((&f % &p_pow_a).is_zero());
            let deriv_unit =
                (&d_unit * x.modpow(&BigInt::from(d - 1), &modulus)).mod_floor(&modulus);
            let deriv_inv = BigInt::from(
                inv_mod(
                    &deriv_unit.to_biguint().expect("non-negative"),
                    &modulus.to_biguint().expect("positive"),
                )
                .expect("derivative unit is invertible"),
            );
            let delta = (&f_over_pa * &deriv_inv).mod_floor(&modulus);
            if delta.is_zero() {
                break;
            }
            x = (x - delta).mod_floor(&modulus);
        }
        // The hypothesis makes Newton converge; verify rather than trust.
        let check_mod = BigInt::from(BigUint::from(p).pow((target_prec + a).min(avail)));
        assert!(
            ((x.modpow(&BigInt::from(d), &modulus) - &target_value) % &check_mod).is_zero(),
            "newton iteration failed to converge despite the divisibility hypothesis"
        );
        assert!(
            ((&x - BigInt::one()) % big_p.pow(a + e.min(work - a))).is_zero(),
            "root escaped 1 + d·p^e"
        );
        let unit = x
            .mod_floor(&BigInt::from(BigUint::from(p).pow(target_prec)))
            .to_biguint()
            .expect("non-negative");
        PAdicNumber::from_unit_class(p, 0, unit, target_prec)
    }

    /// Test helper semantics: do the two values agree to `rel` significant digits?
    /// Both must carry at least `rel` digits (exact values always do).
    pub fn agrees_to_precision(&self, other: &Self, rel: u32) -> bool {
        if self.p != other.p {
            return false;
        }
        match (self.ord(), other.ord()) {
            (Valuation::Infinite, Valuation::Infinite) => true,
            (Valuation::Finite(a), Valuation::Finite(b)) => {
                if a != b {
                    return false;
                }
                let m = rel
                    .min(self.effective_precision())
                    .min(other.effective_precision());
                assert!(
                    m == rel,
                    "agrees_to_precision called with operands too shallow for {rel} digits"
                );
                self.unit_mod(m).unwrap() == other.unit_mod(m).unwrap()
            }
            _ => false,
        }
    }
}

impl fmt::Display for PAdicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.data {
            Data::Exact { value, .. } => {
                if value.is_zero() {
                    write!(f, "0 (exact)")
                } else {
                    write!(f, "{value} (exact)")
                }
            }
            Data::Approx { val, unit, prec } => {
                write!(f, "{}^{} * ({} + O({}^{}))", self.p, val, unit, self.p, prec)
            }
        }
    }
}

/// `ord_p` of a nonzero big integer.
pub fn int_ord(n: &BigInt, p: u64) -> u64 {
    assert!(!n.is_zero(), "ord of zero is infinite");
    let mut m = n.abs();
    let big_p = BigInt::from(p);
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&big_p);
        if r.is_zero() {
            v += 1;
            m = q;
        } else {
            return v;
        }
    }
}

fn biguint_ord(n: &BigUint, p: u64) -> u64 {
    assert!(!n.is_zero());
    let mut m = n.clone();
    let big_p = BigUint::from(p);
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&big_p);
        if r.is_zero() {
            v += 1;
            m = q;
        } else {
            return v;
        }
    }
}

/// `ord_p` of a nonzero `u64`.
pub fn int_ord_u64(n: u64, p: u64) -> u64 {
    assert!(n != 0);
    let mut v = 0;
    let mut m = n;
    while m % p == 0 {
        v += 1;
        m /= p;
    }
    v
}

/// `ord_p` of a rational, `Infinite` for zero.
pub fn rational_ord(r: &BigRational, p: u64) -> Valuation {
    if r.is_zero() {
        return Valuation::Infinite;
    }
    let vn = int_ord(r.numer(), p) as i64;
    let vd = int_ord(r.denom(), p) as i64;
    Valuation::Finite(vn - vd)
}

/// Unit part of a nonzero rational modulo `p^m`.
fn rational_unit_mod(r: &BigRational, p: u64, m: u32) -> BigUint {
    let big_p = BigInt::from(p);
    let strip = |n: &BigInt| -> BigInt {
        let mut x = n.clone();
        while (&x % &big_p).is_zero() {
            x /= &big_p;
        }
        x
    };
    let num = strip(r.numer());
    let den = strip(r.denom());
    let modulus = BigUint::from(p).pow(m);
    let num = num.mod_floor(&BigInt::from(modulus.clone())).to_biguint().unwrap();
    let den = den.mod_floor(&BigInt::from(modulus.clone())).to_biguint().unwrap();
    let den_inv = inv_mod(&den, &modulus).expect("denominator is a unit");
    (num * den_inv) % modulus
}

fn rational_pow(r: &BigRational, e: u32) -> BigRational {
    BigRational::new(r.numer().pow(e), r.denom().pow(e))
}

/// Modular inverse via the extended Euclidean algorithm; `None` if not coprime.
pub fn inv_mod(a: &BigUint, modulus: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(modulus.clone());
    let ext = a.extended_gcd(&m);
    if !ext.gcd.is_one() {
        return None;
    }
    Some(ext.x.mod_floor(&m).to_biguint().unwrap())
}

fn add_val(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("valuation overflow")
}

pub(crate) fn check_prime(p: u64) -> Result<()> {
    if is_prime_u64(p) {
        Ok(())
    } else {
        Err(PAdicError::InvalidPrime(p))
    }
}

fn is_prime_u64(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    if p % 3 == 0 {
        return p == 3;
    }
    let mut d = 5u64;
    while d.checked_mul(d).map(|s| s <= p).unwrap_or(false) {
        if p % d == 0 || p % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

pub(crate) fn pow_mod_u64(base: u64, exp: u64, modulus: u64) -> u64 {
    debug_assert!(modulus > 0);
    let mut result = 1u128;
    let mut base = (base % modulus) as u128;
    let mut exp = exp;
    let m = modulus as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    result as u64
}

/// Checked `p^k` as a `u64`, refusing moduli beyond the enumeration cap.
pub(crate) fn checked_prime_power(p: u64, k: u32) -> Result<u64> {
    let mut q: u64 = 1;
    for _ in 0..k {
        q = q
            .checked_mul(p)
            .filter(|&q| q <= ENUMERATION_CAP)
            .ok_or(PAdicError::CapExceeded { p, exp: k })?;
    }
    Ok(q)
}

type PowerClassKey = (u64, u64, u32);
static POWER_CLASSES: OnceLock<Mutex<HashMap<PowerClassKey, Arc<Vec<bool>>>>> = OnceLock::new();

/// The set of n-th powers of units modulo `p^k`, as a membership table
/// indexed by residue. Memoized: the same table is consulted for every
/// power-predicate evaluation at a given `(p, n, k)`.
pub(crate) fn nth_power_unit_classes(p: u64, n: u64, k: u32) -> Result<Arc<Vec<bool>>> {
    let q = checked_prime_power(p, k)?;
    let cache = POWER_CLASSES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("power class cache poisoned");
    if let Some(t) = guard.get(&(p, n, k)) {
        return Ok(Arc::clone(t));
    }
    let mut table = vec![false; q as usize];
    for u in 1..q {
        if u % p != 0 {
            table[pow_mod_u64(u, n, q) as usize] = true;
        }
    }
    let table = Arc::new(table);
    guard.insert((p, n, k), Arc::clone(&table));
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q5(num: i64, den: i64, prec: u32) -> PAdicNumber {
        PAdicNumber::from_rational(&BigInt::from(num), &BigInt::from(den), 5, prec).unwrap()
    }

    #[test]
    fn from_rational_canonical() {
        let x = q5(1, 1, 4);
        assert_eq!(x.ord(), Valuation::Finite(0));
        assert_eq!(x.unit_mod(4).unwrap(), BigUint::from(1u32));

        let x = q5(50, 1, 3);
        assert_eq!(x.ord(), Valuation::Finite(2));
        assert_eq!(x.unit_mod(3).unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn from_rational_inverse_oracle() {
        // Oracle: 3 * 17 = 51 ≡ 1 mod 25.
        assert_eq!((3 * 17) % 25, 1);
        let x = q5(1, 3, 2);
        assert_eq!(x.ord(), Valuation::Finite(0));
        assert_eq!(x.unit_mod(2).unwrap(), BigUint::from(17u32));
    }

    #[test]
    fn zero_is_distinguished() {
        let z = PAdicNumber::zero(5).unwrap();
        assert!(z.is_exact_zero());
        assert_eq!(z.ord(), Valuation::Infinite);
        assert!(z.ac_mod(1).is_err());
    }

    #[test]
    fn mul_adds_valuations() {
        let x = PAdicNumber::from_unit_class(5, 1, BigUint::from(2u32), 3).unwrap();
        let y = PAdicNumber::from_unit_class(5, 2, BigUint::from(3u32), 3).unwrap();
        let z = x.mul(&y).unwrap();
        assert_eq!(z.ord(), Valuation::Finite(3));
        assert_eq!(z.unit_mod(3).unwrap(), BigUint::from(6u32));
        assert_eq!(z.precision(), 3);
    }

    #[test]
    fn pow_inverse_oracle() {
        // Oracle: 2 * 13 = 26 ≡ 1 mod 25.
        assert_eq!((2 * 13) % 25, 1);
        let x = PAdicNumber::from_unit_class(5, 1, BigUint::from(2u32), 2).unwrap();
        let y = x.pow(-1).unwrap();
        assert_eq!(y.ord(), Valuation::Finite(-1));
        assert_eq!(y.unit_mod(2).unwrap(), BigUint::from(13u32));
    }

    #[test]
    fn pow_zero_exponent() {
        let x = PAdicNumber::from_unit_class(5, 7, BigUint::from(3u32), 2).unwrap();
        let y = x.pow(0).unwrap();
        assert_eq!(y.ord(), Valuation::Finite(0));
        assert_eq!(y.unit_mod(2).unwrap(), BigUint::from(1u32));
    }

    #[test]
    fn add_simple() {
        let x = PAdicNumber::from_unit_class(5, 0, BigUint::from(1u32), 3).unwrap();
        let y = PAdicNumber::from_unit_class(5, 1, BigUint::from(1u32), 3).unwrap();
        let z = x.add(&y).unwrap();
        assert_eq!(z.ord(), Valuation::Finite(0));
        assert_eq!(z.unit_mod(3).unwrap(), BigUint::from(6u32));
    }

    #[test]
    fn add_carry_drops_precision() {
        // 1 + 4 = 5: valuation climbs, one digit lost.
        let x = PAdicNumber::from_unit_class(5, 0, BigUint::from(1u32), 2).unwrap();
        let y = PAdicNumber::from_unit_class(5, 0, BigUint::from(4u32), 2).unwrap();
        let z = x.add(&y).unwrap();
        assert_eq!(z.ord(), Valuation::Finite(1));
        assert_eq!(z.unit_mod(1).unwrap(), BigUint::from(1u32));
        assert_eq!(z.precision(), 1);
    }

    #[test]
    fn cancellation_is_precision_loss_for_inexact() {
        let x = PAdicNumber::from_unit_class(5, 0, BigUint::from(7u32), 3).unwrap();
        assert_eq!(x.sub(&x).unwrap_err(), PAdicError::PrecisionLoss);
    }

    #[test]
    fn cancellation_is_exact_zero_for_exact() {
        let x = q5(7, 3, 4);
        let z = x.sub(&x).unwrap();
        assert!(z.is_exact_zero());
    }

    #[test]
    fn ord_examples() {
        assert_eq!(q5(50, 1, 4).ord(), Valuation::Finite(2));
        assert_eq!(q5(1, 5, 4).ord(), Valuation::Finite(-1));
        assert_eq!(PAdicNumber::zero(5).unwrap().ord(), Valuation::Infinite);
    }

    #[test]
    fn ac_mod_examples() {
        let x = q5(50, 1, 3);
        assert_eq!(x.ac_mod(2).unwrap().value(), &BigUint::from(2u32));
        let y = q5(-1, 1, 2);
        assert_eq!(y.ac_mod(1).unwrap().value(), &BigUint::from(4u32));
    }

    #[test]
    fn ac_mod_insufficient_precision() {
        let x = PAdicNumber::from_unit_class(5, 0, BigUint::from(2u32), 1).unwrap();
        assert!(matches!(
            x.ac_mod(3),
            Err(PAdicError::InsufficientPrecision { needed: 3, available: 1 })
        ));
    }

    #[test]
    fn nth_power_examples() {
        // Oracle: squares mod 5 are {1, 4}.
        let squares: std::collections::BTreeSet<u64> = (1..5u64).map(|u| u * u % 5).collect();
        assert_eq!(squares, [1u64, 4].into_iter().collect());

        let minus_one = q5(-1, 1, 6);
        assert!(minus_one.is_nth_power(2).unwrap());
        let two = q5(2, 1, 6);
        assert!(!two.is_nth_power(2).unwrap());

        // Oracle: squares of units mod 8 are {1}, and 17 ≡ 1 mod 8.
        let seventeen = PAdicNumber::from_integer(17, 2, 8).unwrap();
        assert!(seventeen.is_nth_power(2).unwrap());

        let five = q5(5, 1, 6);
        assert!(!five.is_nth_power(2).unwrap());

        assert!(PAdicNumber::zero(5).unwrap().is_nth_power(7).unwrap());
    }

    #[test]
    fn nth_power_insufficient_precision() {
        // Testing squareness in Q_2 needs 3 digits.
        let x = PAdicNumber::from_unit_class(2, 0, BigUint::from(1u32), 2).unwrap();
        assert!(matches!(
            x.is_nth_power(2),
            Err(PAdicError::InsufficientPrecision { needed: 3, .. })
        ));
    }

    #[test]
    fn hensel_root_of_17() {
        // Oracle: squares mod 64 of numbers ≡ 1 mod 4: 9^2 = 81 ≡ 17.
        assert_eq!((9 * 9) % 64, 17);
        let u = PAdicNumber::from_integer(17, 2, 12).unwrap();
        let root = PAdicNumber::hensel_nth_root(&u, 2, 6).unwrap();
        assert_eq!(root.unit_mod(4).unwrap(), BigUint::from(9u32));
        let sq = root.mul(&root).unwrap();
        assert_eq!(sq.unit_mod(6).unwrap(), u.unit_mod(6).unwrap());
    }

    #[test]
    fn hensel_root_of_one() {
        let u = PAdicNumber::one(7, 10).unwrap();
        let root = PAdicNumber::hensel_nth_root(&u, 5, 8).unwrap();
        assert_eq!(root.ord(), Valuation::Finite(0));
        assert_eq!(root.unit_mod(8).unwrap(), BigUint::from(1u32));
    }

    #[test]
    fn hensel_root_mod_25() {
        // Oracle: 11^2 = 121 ≡ 21 mod 25.
        assert_eq!((11 * 11) % 25, 21);
        let u = q5(21, 1, 10);
        let root = PAdicNumber::hensel_nth_root(&u, 2, 2).unwrap();
        assert_eq!(root.unit_mod(2).unwrap(), BigUint::from(11u32));
    }

    #[test]
    fn hensel_root_rejects_shallow_hypothesis() {
        // 6 - 1 = 5 has ord 1 < 2*ord_5(5) + 1 = 3.
        let u = q5(6, 1, 10);
        assert!(matches!(
            PAdicNumber::hensel_nth_root(&u, 5, 4),
            Err(PAdicError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn div_by_zero() {
        let x = q5(3, 1, 4);
        let z = PAdicNumber::zero(5).unwrap();
        assert_eq!(x.div(&z).unwrap_err(), PAdicError::DivisionByZero);
    }

    #[test]
    fn power_test_stable_across_precision() {
        for &(num, n) in &[(14i64, 2u64), (6, 3), (44, 2), (-4, 2)] {
            let shallow = q5(num, 1, 3);
            let deep = q5(num, 1, 40);
            assert_eq!(
                shallow.is_nth_power(n).unwrap(),
                deep.is_nth_power(n).unwrap(),
                "power test must not depend on precision (num={num}, n={n})"
            );
        }
    }
}
