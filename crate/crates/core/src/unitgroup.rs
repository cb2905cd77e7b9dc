//! Finite computations in `(Z/p^M)^x` and its powers: the image subgroup of a
//! monomial homomorphism on angular components, membership tests with
//! witnesses, and coset representatives of n-th powers in `Q_p^x`.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::monomial::{CoordinateTag, MonomialMap};
use crate::padic::{self, PAdicError};

/// Default cap on the number of tuples stored in a subgroup table.
pub const DEFAULT_TABLE_CAP: u64 = 1_000_000;

/// Default cap on `p^M` for plain unit-group enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnitGroupError {
    #[error("enumeration of {0} residues exceeds the cap {1}")]
    CapExceeded(u64, u64),
    #[error("subgroup closure exceeded the cap of {0} tuples")]
    TableCapExceeded(u64),
    #[error("ideal exponent {e} exceeds the modulus exponent {m}")]
    IdealExceedsModulus { e: u32, m: u32 },
    #[error("tags cover {tags} coordinates but the map has {cols} columns")]
    TagMismatch { tags: usize, cols: usize },
    #[error(transparent)]
    Padic(#[from] PAdicError),
}

pub type Result<T> = std::result::Result<T, UnitGroupError>;

/// All units modulo `p^m`, in increasing order.
pub fn unit_group(p: u64, m: u32) -> Result<Vec<u64>> {
    unit_group_capped(p, m, DEFAULT_ENUMERATION_CAP)
}

pub fn unit_group_capped(p: u64, m: u32, cap: u64) -> Result<Vec<u64>> {
    padic::check_prime(p)?;
    let q = prime_power(p, m)?;
    if q > cap {
        return Err(UnitGroupError::CapExceeded(q, cap));
    }
    Ok((1..q).filter(|u| u % p != 0).collect())
}

/// Units congruent to 1 modulo `p^e`, viewed modulo `p^m`.
pub fn one_plus_ideal(p: u64, m: u32, e: u32, cap: u64) -> Result<Vec<u64>> {
    if e > m {
        return Err(UnitGroupError::IdealExceedsModulus { e, m });
    }
    let q = prime_power(p, m)?;
    if q > cap {
        return Err(UnitGroupError::CapExceeded(q, cap));
    }
    let step = pow_u64(p, e);
    Ok((0..q / step).map(|t| 1 + t * step).collect())
}

fn prime_power(p: u64, m: u32) -> Result<u64> {
    let mut q: u64 = 1;
    for _ in 0..m {
        q = q.checked_mul(p).ok_or(UnitGroupError::CapExceeded(u64::MAX, u64::MAX))?;
    }
    Ok(q)
}

fn pow_u64(p: u64, m: u32) -> u64 {
    (0..m).fold(1u64, |acc, _| acc * p)
}

fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

/// Multiplicative order of `g` modulo `q = p^m`, given the factored group order.
fn order_mod(g: u64, q: u64, group_order: u64, prime_factors: &[u64]) -> u64 {
    let mut ord = group_order;
    for &f in prime_factors {
        while ord % f == 0 && padic::pow_mod_u64(g, ord / f, q) == 1 {
            ord /= f;
        }
    }
    ord
}

fn factor_u64(mut n: u64) -> Vec<u64> {
    let mut factors = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            factors.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    factors
}

/// Generators of `(Z/p^m)^x`: a primitive root for odd p, `{-1, 5}` for
/// `p = 2, m >= 3`. The choice is verified by closure before use.
fn unit_generators(p: u64, m: u32) -> Result<Vec<u64>> {
    let q = prime_power(p, m)?;
    if p == 2 {
        return Ok(match m {
            1 => vec![],
            2 => vec![3],
            _ => vec![q - 1, 5],
        });
    }
    let group_order = q / p * (p - 1);
    let factors = factor_u64(group_order);
    let g = (2..q)
        .filter(|g| g % p != 0)
        .find(|&g| order_mod(g, q, group_order, &factors) == group_order)
        .expect("odd prime powers have a primitive root");
    Ok(vec![g])
}

/// Generators of the kernel of reduction `1 + p^e Z / p^m`:
/// `1 + p^e` for odd p, with `-1` added when `p = 2, e = 1`.
fn kernel_generators(p: u64, m: u32, e: u32) -> Result<Vec<u64>> {
    if e > m {
        return Err(UnitGroupError::IdealExceedsModulus { e, m });
    }
    let q = prime_power(p, m)?;
    if e == m {
        return Ok(vec![]);
    }
    if p == 2 && e == 1 {
        return Ok(vec![3 % q, q - 1]);
    }
    Ok(vec![(1 + pow_u64(p, e)) % q])
}

/// Closure of a generator set under multiplication modulo `q`.
fn scalar_closure(generators: &[u64], q: u64) -> Vec<u64> {
    let mut seen: Vec<u64> = vec![1];
    let mut set: std::collections::HashSet<u64> = seen.iter().copied().collect();
    let mut queue: VecDeque<u64> = seen.clone().into();
    while let Some(x) = queue.pop_front() {
        for &g in generators {
            let y = mul_mod(x, g, q);
            if set.insert(y) {
                seen.push(y);
                queue.push_back(y);
            }
        }
    }
    seen.sort_unstable();
    seen
}

/// The image of the side-constrained unit tuples under a monomial
/// homomorphism, stored with one witness decomposition per element.
#[derive(Debug, Clone)]
pub struct SubgroupTable {
    p: u64,
    modulus_exp: u32,
    arity: usize,
    witness_len: usize,
    elements: HashMap<Vec<u64>, Vec<u64>>,
}

impl SubgroupTable {
    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn modulus_exp(&self) -> u32 {
        self.modulus_exp
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Length of witness tuples: the number of map columns.
    pub fn witness_len(&self) -> usize {
        self.witness_len
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, target: &[u64]) -> bool {
        self.elements.contains_key(target)
    }

    /// Per-column unit residues mapping onto `target`, if it lies in the image.
    pub fn member_witness(&self, target: &[u64]) -> Option<Vec<u64>> {
        self.elements.get(target).cloned()
    }

    /// Elements in sorted order (the storage itself is unordered).
    pub fn sorted_elements(&self) -> Vec<Vec<u64>> {
        let mut v: Vec<Vec<u64>> = self.elements.keys().cloned().collect();
        v.sort_unstable();
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u64>, &Vec<u64>)> {
        self.elements.iter()
    }
}

/// Compute the set `{ (prod_i u_i^{a_ji})_j mod p^m }` where `u_i` ranges over
/// all units for `Full` columns and over `1 + p^e` for `UnitBall` columns, as
/// a BFS closure from generator images. Every element keeps the witness tuple
/// that first produced it.
pub fn image_subgroup(
    map: &MonomialMap,
    tags: &[CoordinateTag],
    p: u64,
    m: u32,
    e: u32,
) -> Result<SubgroupTable> {
    image_subgroup_capped(map, tags, p, m, e, DEFAULT_TABLE_CAP)
}

pub fn image_subgroup_capped(
    map: &MonomialMap,
    tags: &[CoordinateTag],
    p: u64,
    m: u32,
    e: u32,
    cap: u64,
) -> Result<SubgroupTable> {
    padic::check_prime(p)?;
    if tags.len() != map.cols() {
        return Err(UnitGroupError::TagMismatch {
            tags: tags.len(),
            cols: map.cols(),
        });
    }
    if e > m {
        return Err(UnitGroupError::IdealExceedsModulus { e, m });
    }
    let q = prime_power(p, m)?;

    // Column generators, each verified by comparing the closure size with the
    // known group order rather than trusting the textbook generator choice.
    let mut column_gens: Vec<Vec<u64>> = Vec::with_capacity(map.cols());
    for tag in tags {
        let gens = match tag {
            CoordinateTag::Full => {
                let gens = unit_generators(p, m)?;
                let expected = if p == 2 { q / 2 } else { q / p * (p - 1) };
                assert_eq!(
                    scalar_closure(&gens, q).len() as u64,
                    expected,
                    "unit generator set failed verification"
                );
                gens
            }
            CoordinateTag::UnitBall => {
                let gens = kernel_generators(p, m, e)?;
                let expected = pow_u64(p, m - e);
                assert_eq!(
                    scalar_closure(&gens, q).len() as u64,
                    expected,
                    "kernel generator set failed verification"
                );
                gens
            }
        };
        column_gens.push(gens);
    }

    let arity = map.rows();
    let identity = vec![1u64; arity];
    let mut elements: HashMap<Vec<u64>, Vec<u64>> = HashMap::new();
    elements.insert(identity.clone(), vec![1u64; map.cols()]);
    let mut queue: VecDeque<Vec<u64>> = VecDeque::new();
    queue.push_back(identity);
    while let Some(tuple) = queue.pop_front() {
        let witness = elements[&tuple].clone();
        for (col, gens) in column_gens.iter().enumerate() {
            for &g in gens {
                let next: Vec<u64> = (0..arity)
                    .map(|j| mul_mod(tuple[j], padic::pow_mod_u64(g, map.entry(j, col), q), q))
                    .collect();
                if let Entry::Vacant(slot) = elements.entry(next.clone()) {
                    let mut w = witness.clone();
                    w[col] = mul_mod(w[col], g, q);
                    slot.insert(w);
                    if elements.len() as u64 > cap {
                        return Err(UnitGroupError::TableCapExceeded(cap));
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(SubgroupTable {
        p,
        modulus_exp: m,
        arity,
        witness_len: map.cols(),
        elements,
    })
}

/// A representative `p^p_exp * unit` of one class of `Q_p^x / (Q_p^x)^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CosetRep {
    pub p_exp: u32,
    pub unit: u64,
}

impl CosetRep {
    pub fn value(&self, p: u64) -> u64 {
        pow_u64(p, self.p_exp)
            .checked_mul(self.unit)
            .expect("coset representative exceeds u64")
    }
}

/// Coset representatives of `Q_p^x` modulo n-th powers: `p^a * u` with
/// `0 <= a < n` and `u` ranging over unit representatives modulo n-th powers
/// of units, enumerated at the working modulus `p^(2 ord_p(n) + 1)`.
pub fn nth_power_cosets(p: u64, n: u64) -> Result<Vec<CosetRep>> {
    padic::check_prime(p)?;
    assert!(n >= 1, "power index must be at least 1");
    let k = 2 * padic::int_ord_u64(n, p) as u32 + 1;
    let q = prime_power(p, k)?;
    if q > DEFAULT_ENUMERATION_CAP {
        return Err(UnitGroupError::CapExceeded(q, DEFAULT_ENUMERATION_CAP));
    }
    let powers = padic::nth_power_unit_classes(p, n, k)?;
    let mut unit_reps: Vec<u64> = Vec::new();
    for u in 1..q {
        if u % p == 0 {
            continue;
        }
        let fresh = unit_reps.iter().all(|&r| {
            let r_inv = padic::pow_mod_u64(r, euler_phi_prime_power(p, k) - 1, q);
            !powers[mul_mod(u, r_inv, q) as usize]
        });
        if fresh {
            unit_reps.push(u);
        }
    }
    let mut reps = Vec::new();
    for a in 0..n as u32 {
        for &u in &unit_reps {
            reps.push(CosetRep { p_exp: a, unit: u });
        }
    }
    Ok(reps)
}

fn euler_phi_prime_power(p: u64, k: u32) -> u64 {
    pow_u64(p, k - 1) * (p - 1)
}
