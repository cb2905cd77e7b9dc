//! Shared test support: independent oracles, random generators, and the
//! catalog of (map, domain, prime) cases used across the suites.
//!
//! Everything here deliberately avoids the library's own decision paths:
//! the bounded quantifier evaluator walks formulas with its own evaluator,
//! and the enumeration oracles are plain loops over residues.

#![allow(dead_code)]

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::Rng;

use padic_qe_core::monomial::{CoordinateTag, MonomialMap, StandardDomain};
use padic_qe_core::padic::PAdicNumber;
use padic_qe_core::presburger::{Atom, Formula, LinearTerm};

// ---------------------------------------------------------------------------
// random p-adic values
// ---------------------------------------------------------------------------

/// A random integer in `[1, p^digits)` coprime to `p`.
pub fn random_unit_int(rng: &mut StdRng, p: u64, digits: u32) -> BigInt {
    let mut value = BigInt::from(0);
    let big_p = BigInt::from(p);
    for _ in 0..digits {
        value = value * &big_p + BigInt::from(rng.gen_range(0..p));
    }
    let unit_digit = BigInt::from(rng.gen_range(1..p));
    let remainder = value.clone() % &big_p;
    value - remainder + unit_digit
}

/// A random exact value `p^v * u` with `v` drawn from `v_range` and `u` a
/// random unit known to `digits` digits.
pub fn random_exact_value(
    rng: &mut StdRng,
    p: u64,
    v_range: std::ops::RangeInclusive<i64>,
    digits: u32,
    prec: u32,
) -> PAdicNumber {
    let v = rng.gen_range(v_range);
    let unit = random_unit_int(rng, p, digits);
    let big_p = BigInt::from(p);
    let (num, den) = if v >= 0 {
        (unit * big_p.pow(v as u32), BigInt::from(1))
    } else {
        (unit, big_p.pow((-v) as u32))
    };
    PAdicNumber::from_rational(&num, &den, p, prec).unwrap()
}

/// A random point of the standard domain, as exact values.
pub fn random_domain_point(
    rng: &mut StdRng,
    domain: &StandardDomain,
    p: u64,
    prec: u32,
) -> Vec<PAdicNumber> {
    domain
        .tags()
        .iter()
        .map(|tag| match tag {
            CoordinateTag::Full => random_exact_value(rng, p, 0..=3, 8, prec),
            CoordinateTag::UnitBall => {
                let t = random_unit_int(rng, p, 5);
                let scale = BigInt::from(p).pow(domain.ideal_exp());
                let offset = if rng.gen_bool(0.1) {
                    BigInt::from(0)
                } else {
                    t * scale
                };
                PAdicNumber::from_rational(
                    &(BigInt::from(1) + offset),
                    &BigInt::from(1),
                    p,
                    prec,
                )
                .unwrap()
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// bounded-quantifier oracle for Presburger formulas
// ---------------------------------------------------------------------------

/// Evaluate with existential quantifiers searched over `[-bound, bound]`.
/// This is the differential-testing baseline: exact whenever every witness
/// needed lies inside the box.
pub fn bounded_eval(f: &Formula, assignment: &mut Vec<(String, i64)>, bound: i64) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => eval_atom(a, assignment),
        Formula::Not(g) => !bounded_eval(g, assignment, bound),
        Formula::And(fs) => fs.iter().all(|g| bounded_eval(g, assignment, bound)),
        Formula::Or(fs) => fs.iter().any(|g| bounded_eval(g, assignment, bound)),
        Formula::Exists(x, body) => {
            assignment.push((x.clone(), 0));
            let mut found = false;
            for value in -bound..=bound {
                assignment.last_mut().unwrap().1 = value;
                if bounded_eval(body, assignment, bound) {
                    found = true;
                    break;
                }
            }
            assignment.pop();
            found
        }
    }
}

fn eval_atom(a: &Atom, assignment: &[(String, i64)]) -> bool {
    let term_value = |t: &LinearTerm| -> i64 {
        let mut total = t.constant_part();
        for (v, c) in t.coeffs() {
            // innermost binding wins
            let val = assignment
                .iter()
                .rev()
                .find(|(name, _)| name == v)
                .map(|(_, x)| *x)
                .unwrap_or_else(|| panic!("unbound variable {v} in oracle"));
            total += c * val;
        }
        total
    };
    match a {
        Atom::Eq(t) => term_value(t) == 0,
        Atom::Geq(t) => term_value(t) >= 0,
        Atom::Divides(m, t) => term_value(t).rem_euclid(*m as i64) == 0,
    }
}

/// Search-bound ladder by quantifier count: escalation levels for the
/// differential test. Chosen so the span-plus-period witness bound of the
/// generated formulas falls well inside the top level.
pub fn bound_ladder(quantifiers: usize) -> &'static [i64] {
    match quantifiers {
        0 | 1 => &[400, 3000],
        2 => &[150, 700],
        _ => &[60, 180],
    }
}

// ---------------------------------------------------------------------------
// random Presburger formulas
// ---------------------------------------------------------------------------

pub struct RandomFormula {
    pub formula: Formula,
    pub free_vars: Vec<String>,
    pub quantifiers: usize,
}

/// A random formula with at most 3 quantifiers, at most 4 variables,
/// coefficients in `[-5, 5]` and moduli up to 6.
pub fn random_formula(rng: &mut StdRng) -> RandomFormula {
    let quantifiers = *[0usize, 1, 1, 1, 1, 2, 2, 2, 3, 3]
        .get(rng.gen_range(0..10))
        .unwrap();
    // Free-variable counts capped by quantifier depth: the oracle's search
    // cost is (2B+1)^q per assignment and 31^k assignments.
    let max_free = match quantifiers {
        0 | 1 => 2usize,
        2 => 1,
        _ => 0,
    };
    let min_free = usize::from(quantifiers == 0);
    let free_count = rng.gen_range(min_free..=max_free.max(min_free));
    let total = quantifiers + free_count;
    let vars: Vec<String> = (0..total).map(|i| format!("x{}", i + 1)).collect();

    let atom_count = rng.gen_range(2..=5);
    let mut atoms = Vec::new();
    for _ in 0..atom_count {
        atoms.push(Formula::Atom(random_atom(rng, &vars)));
    }
    let mut matrix = random_boolean_tree(rng, &mut atoms);
    // Wrap a positive existential prefix. Negations occur freely inside the
    // matrix; they stay below the quantifiers because the baseline semantics
    // is witness search, which decides exactly the positive prefix fragment.
    for var in vars.iter().skip(free_count).take(quantifiers) {
        matrix = Formula::exists(var.clone(), matrix);
    }
    RandomFormula {
        formula: matrix,
        free_vars: vars[..free_count].to_vec(),
        quantifiers,
    }
}

/// A random quantifier-free formula over the given variables.
pub fn random_qf_formula(rng: &mut StdRng, vars: &[String]) -> Formula {
    let atom_count = rng.gen_range(2..=5);
    let mut atoms: Vec<Formula> = (0..atom_count)
        .map(|_| Formula::Atom(random_atom(rng, vars)))
        .collect();
    random_boolean_tree(rng, &mut atoms)
}

fn random_atom(rng: &mut StdRng, vars: &[String]) -> Atom {
    let mut term = LinearTerm::constant(rng.gen_range(-5..=5));
    let mut used = 0;
    for v in vars {
        if rng.gen_bool(0.55) {
            let c = loop {
                let c = rng.gen_range(-5..=5);
                if c != 0 {
                    break c;
                }
            };
            term = term.add(&LinearTerm::monomial(v.clone(), c)).unwrap();
            used += 1;
        }
    }
    if used == 0 {
        let v = &vars[rng.gen_range(0..vars.len())];
        term = term
            .add(&LinearTerm::monomial(v.clone(), rng.gen_range(1..=5)))
            .unwrap();
    }
    match rng.gen_range(0..6) {
        0 => Atom::Eq(term),
        1 | 2 | 3 => Atom::Geq(term),
        _ => Atom::Divides(rng.gen_range(2..=6), term),
    }
}

fn random_boolean_tree(rng: &mut StdRng, atoms: &mut Vec<Formula>) -> Formula {
    // Combine the atom pool bottom-up with random connectives.
    while atoms.len() > 1 {
        let take = rng.gen_range(2..=atoms.len().min(3));
        let parts: Vec<Formula> = atoms.drain(..take).collect();
        let combined = match rng.gen_range(0..5) {
            0 | 1 => Formula::and(parts),
            2 | 3 => Formula::or(parts),
            _ => Formula::not(Formula::and(parts)),
        };
        atoms.push(combined);
    }
    atoms.pop().unwrap()
}

// ---------------------------------------------------------------------------
// catalog of end-to-end cases
// ---------------------------------------------------------------------------

pub struct CatalogCase {
    pub name: &'static str,
    pub p: u64,
    pub map: MonomialMap,
    pub domain: StandardDomain,
}

/// The (map, domain, prime) cases exercised end to end. Every case keeps the
/// working modulus and subgroup small enough for exhaustive verification.
pub fn catalog() -> Vec<CatalogCase> {
    use CoordinateTag::{Full, UnitBall};
    let case = |name, p, rows: Vec<Vec<i64>>, tags: Vec<CoordinateTag>, e| CatalogCase {
        name,
        p,
        map: MonomialMap::new(rows).unwrap(),
        domain: StandardDomain::new(tags, e).unwrap(),
    };
    vec![
        case("squares over Z5", 5, vec![vec![2]], vec![Full], 1),
        case("squares over Z2", 2, vec![vec![2]], vec![Full], 1),
        case("cubes over Z3", 3, vec![vec![3]], vec![Full], 1),
        case("cubes over Z2", 2, vec![vec![3]], vec![Full], 1),
        case("identity on 1+5Z5", 5, vec![vec![1]], vec![UnitBall], 1),
        case("identity on 1+25Z5", 5, vec![vec![1]], vec![UnitBall], 2),
        case(
            "triangular over Z2^2",
            2,
            vec![vec![1, 1], vec![0, 2]],
            vec![Full, Full],
            1,
        ),
        case(
            "triangular over Z5^2",
            5,
            vec![vec![1, 1], vec![0, 2]],
            vec![Full, Full],
            1,
        ),
        case(
            "shear over Z3^2",
            3,
            vec![vec![2, 0], vec![1, 1]],
            vec![Full, Full],
            1,
        ),
        case(
            "shear with unit-ball column over Z3",
            3,
            vec![vec![2, 0], vec![1, 1]],
            vec![Full, UnitBall],
            2,
        ),
        case(
            "shear over Z2^2",
            2,
            vec![vec![2, 0], vec![1, 1]],
            vec![Full, Full],
            1,
        ),
        case("single row over Z5^2", 5, vec![vec![1, 2]], vec![Full, Full], 1),
        case(
            "single row with unit-ball column over Z2",
            2,
            vec![vec![2, 3]],
            vec![Full, UnitBall],
            1,
        ),
        case(
            "doubled diagonal over Z2^2",
            2,
            vec![vec![2, 2], vec![0, 2]],
            vec![Full, Full],
            1,
        ),
        case(
            "unit-ball square over Z5^2",
            5,
            vec![vec![1, 1], vec![1, 2]],
            vec![UnitBall, UnitBall],
            1,
        ),
        case(
            "three columns over Z2^3",
            2,
            vec![vec![1, 0, 1], vec![0, 1, 1]],
            vec![Full, Full, Full],
            1,
        ),
    ]
}

/// Seeded RNG so every run checks the same corpus.
pub fn rng(seed: u64) -> StdRng {
    use rand::SeedableRng;
    StdRng::seed_from_u64(seed)
}
