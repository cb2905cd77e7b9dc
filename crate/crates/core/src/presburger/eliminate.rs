//! Cooper-style quantifier elimination.
//!
//! Innermost quantifiers are eliminated first. For one `exists x` over a
//! quantifier-free matrix: normalize the matrix to negation normal form,
//! unitize the coefficient of `x` to the lcm `L` (recording `L | x`), then
//! replace the quantifier by the disjunction over the minus-infinity formula
//! and the boundary substitutions `x := b + j`, `j = 1..delta`, with `delta`
//! the lcm of the divisibility moduli. The mirrored (upper-bound) form is
//! used when it has fewer boundary terms.

use std::collections::BTreeSet;

use num_integer::Integer;

use super::{checked, Atom, Formula, LinearTerm, PresburgerError, Result};

#[derive(Debug, Clone)]
pub struct EliminationConfig {
    /// Hard bound on the node count of any intermediate formula.
    pub max_nodes: u64,
}

impl Default for EliminationConfig {
    fn default() -> Self {
        EliminationConfig { max_nodes: 1_000_000 }
    }
}

/// Eliminate all quantifiers with the default configuration.
pub fn eliminate(formula: &Formula) -> Result<Formula> {
    eliminate_with(formula, &EliminationConfig::default())
}

pub fn eliminate_with(formula: &Formula, config: &EliminationConfig) -> Result<Formula> {
    let out = elim_rec(formula, config)?;
    debug_assert!(out.is_quantifier_free());
    Ok(out.simplify())
}

fn elim_rec(formula: &Formula, config: &EliminationConfig) -> Result<Formula> {
    match formula {
        Formula::True | Formula::False | Formula::Atom(_) => Ok(formula.clone()),
        Formula::Not(f) => Ok(Formula::not(elim_rec(f, config)?)),
        Formula::And(fs) => Ok(Formula::and(
            fs.iter().map(|f| elim_rec(f, config)).collect::<Result<_>>()?,
        )),
        Formula::Or(fs) => Ok(Formula::or(
            fs.iter().map(|f| elim_rec(f, config)).collect::<Result<_>>()?,
        )),
        Formula::Exists(x, body) => {
            let body = elim_rec(body, config)?;
            cooper_step(x, &body, config)
        }
    }
}

/// Literal normalized with respect to the quantified variable: the variable
/// occurs with coefficient exactly +1 (conceptually, after the `L | x`
/// rescaling), and `r` is the variable-free remainder.
#[derive(Debug, Clone)]
enum XLit {
    /// x + r = 0
    E(LinearTerm),
    /// x + r != 0
    N(LinearTerm),
    /// x + r >= 0
    G(LinearTerm),
    /// x + r < 0
    Lt(LinearTerm),
    /// m | x + r
    D(u64, LinearTerm),
    /// not (m | x + r)
    Nd(u64, LinearTerm),
    /// literal not mentioning x, kept verbatim
    Free(Formula),
}

#[derive(Debug, Clone)]
enum XTree {
    True,
    False,
    Lit(XLit),
    And(Vec<XTree>),
    Or(Vec<XTree>),
}

impl XTree {
    fn lit_count(&self) -> u64 {
        match self {
            XTree::True | XTree::False | XTree::Lit(_) => 1,
            XTree::And(fs) | XTree::Or(fs) => 1 + fs.iter().map(|f| f.lit_count()).sum::<u64>(),
        }
    }
}

fn cooper_step(x: &str, body: &Formula, config: &EliminationConfig) -> Result<Formula> {
    let body = body.simplify();
    if !body.free_vars().contains(x) {
        return Ok(body);
    }
    // An existential quantifier distributes over disjunction; eliminating
    // per disjunct keeps the intermediate formulas small.
    if let Formula::Or(parts) = &body {
        let mut out = Vec::with_capacity(parts.len());
        for part in parts {
            out.push(cooper_step(x, part, config)?);
        }
        return Ok(Formula::or(out).simplify());
    }

    // lcm of |coefficient of x| over all atoms.
    let mut lcm_coeff: i64 = 1;
    collect_coeffs(&body, x, &mut lcm_coeff)?;
    let scale = lcm_coeff;

    let mut tree = to_xtree(&body, x, scale, false)?;
    // The rescaled variable is L*x, so record L | x'.
    if scale != 1 {
        tree = XTree::And(vec![
            tree,
            XTree::Lit(XLit::D(scale as u64, LinearTerm::constant(0))),
        ]);
    }

    // Prefer the side with fewer boundary terms; mirroring substitutes -x for x.
    let (lower, upper) = boundary_counts(&tree);
    if upper < lower {
        tree = mirror(tree)?;
    }

    // delta: lcm of all divisibility moduli on x.
    let mut delta: u64 = 1;
    collect_moduli(&tree, &mut delta)?;

    let boundaries = boundary_terms(&tree)?;
    let branch_count = checked_u64_mul(delta, 1 + boundaries.len() as u64)?;
    let estimated = checked_u64_mul(branch_count, tree.lit_count())?;
    if estimated > config.max_nodes {
        return Err(PresburgerError::ResourceLimit(config.max_nodes));
    }

    let delta_i = i64::try_from(delta).map_err(|_| PresburgerError::Overflow)?;
    let mut disjuncts = Vec::new();
    for j in 1..=delta_i {
        disjuncts.push(subst_minus_inf(&tree, j)?);
    }
    for b in &boundaries {
        for j in 1..=delta_i {
            let target = b.add_constant(j)?;
            disjuncts.push(subst(&tree, &target)?);
        }
    }
    let result = Formula::or(disjuncts).simplify();
    if result.node_count() > config.max_nodes {
        return Err(PresburgerError::ResourceLimit(config.max_nodes));
    }
    Ok(result)
}

fn collect_coeffs(f: &Formula, x: &str, lcm: &mut i64) -> Result<()> {
    match f {
        Formula::True | Formula::False => Ok(()),
        Formula::Atom(a) => {
            let t = match a {
                Atom::Eq(t) | Atom::Geq(t) | Atom::Divides(_, t) => t,
            };
            let c = t.coeff(x).abs();
            if c != 0 {
                *lcm = checked(i64::try_from(lcm.unsigned_abs().lcm(&c.unsigned_abs())).ok())?;
            }
            Ok(())
        }
        Formula::Not(g) => collect_coeffs(g, x, lcm),
        Formula::And(fs) | Formula::Or(fs) => {
            fs.iter().try_for_each(|g| collect_coeffs(g, x, lcm))
        }
        Formula::Exists(..) => unreachable!("matrix is quantifier-free"),
    }
}

/// Convert to NNF while unitizing every literal's x-coefficient to `scale`.
fn to_xtree(f: &Formula, x: &str, scale: i64, negated: bool) -> Result<XTree> {
    match f {
        Formula::True => Ok(if negated { XTree::False } else { XTree::True }),
        Formula::False => Ok(if negated { XTree::True } else { XTree::False }),
        Formula::Not(g) => to_xtree(g, x, scale, !negated),
        Formula::And(fs) => {
            let parts = fs
                .iter()
                .map(|g| to_xtree(g, x, scale, negated))
                .collect::<Result<Vec<_>>>()?;
            Ok(if negated { XTree::Or(parts) } else { XTree::And(parts) })
        }
        Formula::Or(fs) => {
            let parts = fs
                .iter()
                .map(|g| to_xtree(g, x, scale, negated))
                .collect::<Result<Vec<_>>>()?;
            Ok(if negated { XTree::And(parts) } else { XTree::Or(parts) })
        }
        Formula::Exists(..) => unreachable!("matrix is quantifier-free"),
        Formula::Atom(a) => {
            let lit = match a {
                Atom::Eq(t) => {
                    let c = t.coeff(x);
                    if c == 0 {
                        free_lit(f, negated)
                    } else {
                        let r = unitized_rest(t, x, c, scale)?;
                        if negated {
                            XLit::N(r)
                        } else {
                            XLit::E(r)
                        }
                    }
                }
                Atom::Geq(t) => {
                    let c = t.coeff(x);
                    if c == 0 {
                        free_lit(f, negated)
                    } else {
                        let k = scale / c.abs();
                        let rest = t.without_var(x).scale(k)?;
                        match (c > 0, negated) {
                            // scale*x + rest >= 0
                            (true, false) => XLit::G(rest),
                            // scale*x + rest < 0
                            (true, true) => XLit::Lt(rest),
                            // -scale*x + rest >= 0  <=>  x + (-rest - 1) < 0
                            (false, false) => XLit::Lt(rest.negate()?.add_constant(-1)?),
                            // -scale*x + rest < 0  <=>  x + (-rest - 1) >= 0
                            (false, true) => XLit::G(rest.negate()?.add_constant(-1)?),
                        }
                    }
                }
                Atom::Divides(m, t) => {
                    let c = t.coeff(x);
                    if c == 0 {
                        free_lit(f, negated)
                    } else {
                        let k = scale / c.abs();
                        let m = checked_u64_mul(*m, k as u64)?;
                        let r = unitized_rest(t, x, c, scale)?;
                        if negated {
                            XLit::Nd(m, r)
                        } else {
                            XLit::D(m, r)
                        }
                    }
                }
            };
            Ok(XTree::Lit(lit))
        }
    }
}

/// Scale the x-free part of `t` so x's coefficient becomes exactly `scale`,
/// flipping signs when the original coefficient was negative (sound for
/// equalities and divisibilities).
fn unitized_rest(t: &LinearTerm, x: &str, c: i64, scale: i64) -> Result<LinearTerm> {
    let k = scale / c.abs();
    let rest = t.without_var(x).scale(k)?;
    if c > 0 {
        Ok(rest)
    } else {
        rest.negate()
    }
}

fn free_lit(f: &Formula, negated: bool) -> XLit {
    if negated {
        XLit::Free(Formula::not(f.clone()))
    } else {
        XLit::Free(f.clone())
    }
}

/// Numbers of lower-boundary terms (B-set) and upper-boundary terms (A-set).
fn boundary_counts(tree: &XTree) -> (u64, u64) {
    match tree {
        XTree::True | XTree::False => (0, 0),
        XTree::Lit(l) => match l {
            XLit::E(_) => (1, 1),
            XLit::N(_) => (1, 1),
            XLit::G(_) => (1, 0),
            XLit::Lt(_) => (0, 1),
            _ => (0, 0),
        },
        XTree::And(fs) | XTree::Or(fs) => fs.iter().fold((0, 0), |(a, b), f| {
            let (x, y) = boundary_counts(f);
            (a + x, b + y)
        }),
    }
}

/// Substitute `-x` for `x` throughout.
fn mirror(tree: XTree) -> Result<XTree> {
    Ok(match tree {
        XTree::True | XTree::False => tree,
        XTree::And(fs) => XTree::And(fs.into_iter().map(mirror).collect::<Result<_>>()?),
        XTree::Or(fs) => XTree::Or(fs.into_iter().map(mirror).collect::<Result<_>>()?),
        XTree::Lit(l) => XTree::Lit(match l {
            XLit::E(r) => XLit::E(r.negate()?),
            XLit::N(r) => XLit::N(r.negate()?),
            XLit::G(r) => XLit::Lt(r.negate()?.add_constant(-1)?),
            XLit::Lt(r) => XLit::G(r.negate()?.add_constant(-1)?),
            XLit::D(m, r) => XLit::D(m, r.negate()?),
            XLit::Nd(m, r) => XLit::Nd(m, r.negate()?),
            XLit::Free(f) => XLit::Free(f),
        }),
    })
}

fn collect_moduli(tree: &XTree, delta: &mut u64) -> Result<()> {
    match tree {
        XTree::True | XTree::False => Ok(()),
        XTree::Lit(XLit::D(m, _)) | XTree::Lit(XLit::Nd(m, _)) => {
            *delta = delta.lcm(m);
            if *delta > i64::MAX as u64 {
                return Err(PresburgerError::Overflow);
            }
            Ok(())
        }
        XTree::Lit(_) => Ok(()),
        XTree::And(fs) | XTree::Or(fs) => fs.iter().try_for_each(|f| collect_moduli(f, delta)),
    }
}

/// The B-set: points just below which each literal can flip to true as x grows.
fn boundary_terms(tree: &XTree) -> Result<Vec<LinearTerm>> {
    fn walk(tree: &XTree, out: &mut BTreeSet<LinearTerm>) -> Result<()> {
        match tree {
            XTree::True | XTree::False => Ok(()),
            XTree::Lit(l) => {
                match l {
                    // x = -r flips at -r: record -r - 1.
                    XLit::E(r) | XLit::G(r) => {
                        out.insert(r.negate()?.add_constant(-1)?);
                    }
                    // x != -r flips to true at -r + 1: record -r.
                    XLit::N(r) => {
                        out.insert(r.negate()?);
                    }
                    _ => {}
                }
                Ok(())
            }
            XTree::And(fs) | XTree::Or(fs) => fs.iter().try_for_each(|f| walk(f, out)),
        }
    }
    let mut set = BTreeSet::new();
    walk(tree, &mut set)?;
    Ok(set.into_iter().collect())
}

/// Instantiate the matrix at `x := value`.
fn subst(tree: &XTree, value: &LinearTerm) -> Result<Formula> {
    Ok(match tree {
        XTree::True => Formula::True,
        XTree::False => Formula::False,
        XTree::And(fs) => Formula::and(fs.iter().map(|f| subst(f, value)).collect::<Result<_>>()?),
        XTree::Or(fs) => Formula::or(fs.iter().map(|f| subst(f, value)).collect::<Result<_>>()?),
        XTree::Lit(l) => match l {
            XLit::E(r) => Formula::eq0(value.add(r)?),
            XLit::N(r) => Formula::not(Formula::eq0(value.add(r)?)),
            XLit::G(r) => Formula::geq0(value.add(r)?),
            // x + r < 0  <=>  -(x + r) - 1 >= 0
            XLit::Lt(r) => Formula::geq0(value.add(r)?.negate()?.add_constant(-1)?),
            XLit::D(m, r) => divides_formula(*m, value.add(r)?),
            XLit::Nd(m, r) => Formula::not(divides_formula(*m, value.add(r)?)),
            XLit::Free(f) => f.clone(),
        },
    })
}

/// Instantiate the minus-infinity form of the matrix at `x := j`.
fn subst_minus_inf(tree: &XTree, j: i64) -> Result<Formula> {
    Ok(match tree {
        XTree::True => Formula::True,
        XTree::False => Formula::False,
        XTree::And(fs) => Formula::and(
            fs.iter()
                .map(|f| subst_minus_inf(f, j))
                .collect::<Result<_>>()?,
        ),
        XTree::Or(fs) => Formula::or(
            fs.iter()
                .map(|f| subst_minus_inf(f, j))
                .collect::<Result<_>>()?,
        ),
        XTree::Lit(l) => match l {
            XLit::E(_) | XLit::G(_) => Formula::False,
            XLit::N(_) | XLit::Lt(_) => Formula::True,
            XLit::D(m, r) => divides_formula(*m, r.add_constant(j)?),
            XLit::Nd(m, r) => Formula::not(divides_formula(*m, r.add_constant(j)?)),
            XLit::Free(f) => f.clone(),
        },
    })
}

fn divides_formula(m: u64, t: LinearTerm) -> Formula {
    if m == 1 {
        Formula::True
    } else {
        Formula::Atom(Atom::Divides(m, t))
    }
}

fn checked_u64_mul(a: u64, b: u64) -> Result<u64> {
    a.checked_mul(b).ok_or(PresburgerError::Overflow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn assignment(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
        pairs.iter().map(|(v, x)| (v.to_string(), *x)).collect()
    }

    /// exists v >= 0 with 2v = w  <=>  w >= 0 and 2 | w
    #[test]
    fn even_nonnegative() {
        let body = Formula::and(vec![
            Formula::geq0(LinearTerm::var("v")),
            Formula::eq0(
                LinearTerm::monomial("v", 2)
                    .sub(&LinearTerm::var("w"))
                    .unwrap(),
            ),
        ]);
        let f = eliminate(&Formula::exists("v", body)).unwrap();
        assert!(f.is_quantifier_free());
        for w in -10..=20 {
            let expected = w >= 0 && w % 2 == 0;
            assert_eq!(
                f.evaluate(&assignment(&[("w", w)])).unwrap(),
                expected,
                "w = {w}"
            );
        }
    }

    /// exists v1, v2 >= 0 with v1 + 2 v2 = w  <=>  w >= 0
    #[test]
    fn coin_one_two() {
        let body = Formula::and(vec![
            Formula::geq0(LinearTerm::var("v1")),
            Formula::geq0(LinearTerm::var("v2")),
            Formula::eq0(
                LinearTerm::var("v1")
                    .add(&LinearTerm::monomial("v2", 2))
                    .unwrap()
                    .sub(&LinearTerm::var("w"))
                    .unwrap(),
            ),
        ]);
        let f = eliminate(&Formula::exists("v1", Formula::exists("v2", body))).unwrap();
        // Oracle: direct enumeration over a box large enough for this range.
        for w in -10..=10 {
            let expected = (0..=20).any(|v1| (0..=20).any(|v2| v1 + 2 * v2 == w));
            assert_eq!(f.evaluate(&assignment(&[("w", w)])).unwrap(), expected);
        }
    }

    /// exists v1, v2 >= 0 with 2 v1 + 3 v2 = w  <=>  w >= 0 and w != 1
    #[test]
    fn numerical_semigroup_two_three() {
        let body = Formula::and(vec![
            Formula::geq0(LinearTerm::var("v1")),
            Formula::geq0(LinearTerm::var("v2")),
            Formula::eq0(
                LinearTerm::monomial("v1", 2)
                    .add(&LinearTerm::monomial("v2", 3))
                    .unwrap()
                    .sub(&LinearTerm::var("w"))
                    .unwrap(),
            ),
        ]);
        let f = eliminate(&Formula::exists("v1", Formula::exists("v2", body))).unwrap();
        for w in -10..=10 {
            let expected = (0..=10).any(|v1| (0..=10).any(|v2| 2 * v1 + 3 * v2 == w));
            assert_eq!(f.evaluate(&assignment(&[("w", w)])).unwrap(), expected);
            assert_eq!(expected, w >= 0 && w != 1, "closed form sanity");
        }
    }

    /// Pure divisibility: exists v with 3 | v and v = w  <=>  3 | w
    #[test]
    fn divisibility_passthrough() {
        let body = Formula::and(vec![
            Formula::divides(3, LinearTerm::var("v")).unwrap(),
            Formula::eq0(LinearTerm::var("v").sub(&LinearTerm::var("w")).unwrap()),
        ]);
        let f = eliminate(&Formula::exists("v", body)).unwrap();
        for w in -9..=9 {
            assert_eq!(
                f.evaluate(&assignment(&[("w", w)])).unwrap(),
                w.rem_euclid(3) == 0
            );
        }
    }

    /// A quantifier under negation acts universally.
    #[test]
    fn negated_quantifier() {
        // not exists v: (v >= 0 and w - v = 0)  <=>  w < 0
        let body = Formula::and(vec![
            Formula::geq0(LinearTerm::var("v")),
            Formula::eq0(LinearTerm::var("w").sub(&LinearTerm::var("v")).unwrap()),
        ]);
        let f = eliminate(&Formula::not(Formula::exists("v", body))).unwrap();
        for w in -5..=5 {
            assert_eq!(f.evaluate(&assignment(&[("w", w)])).unwrap(), w < 0);
        }
    }

    /// Unbounded variable: exists v with 2 | v + w, always true.
    #[test]
    fn always_satisfiable_congruence() {
        let body = Formula::divides(
            2,
            LinearTerm::var("v").add(&LinearTerm::var("w")).unwrap(),
        )
        .unwrap();
        let f = eliminate(&Formula::exists("v", body)).unwrap();
        for w in -4..=4 {
            assert!(f.evaluate(&assignment(&[("w", w)])).unwrap());
        }
    }

    #[test]
    fn eliminate_is_identity_on_quantifier_free() {
        let f = Formula::and(vec![
            Formula::geq0(LinearTerm::var("w")),
            Formula::divides(4, LinearTerm::var("w")).unwrap(),
        ]);
        let g = eliminate(&f).unwrap();
        for w in -8..=8 {
            assert_eq!(
                f.evaluate(&assignment(&[("w", w)])).unwrap(),
                g.evaluate(&assignment(&[("w", w)])).unwrap()
            );
        }
    }

    #[test]
    fn resource_limit_is_enforced() {
        let mut body = Formula::geq0(LinearTerm::var("v"));
        for i in 0..6 {
            body = Formula::and(vec![
                body,
                Formula::divides(
                    5,
                    LinearTerm::monomial("v", 3 + i)
                        .add(&LinearTerm::var(format!("w{i}")))
                        .unwrap(),
                )
                .unwrap(),
            ]);
        }
        let quantified = Formula::exists("v", body);
        let tiny = EliminationConfig { max_nodes: 20 };
        assert!(matches!(
            eliminate_with(&quantified, &tiny),
            Err(PresburgerError::ResourceLimit(20))
        ));
    }
}
