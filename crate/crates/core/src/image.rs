//! Quantifier-free descriptions of images of monomial maps on standard
//! domains, membership decisions, exact preimages, and the brute-force
//! enumeration oracle used to cross-check every answer.
//!
//! Membership of `y` in the image is equivalent to: all `y_j` nonzero, the
//! valuation vector `(ord y_1, .., ord y_m)` satisfying a quantifier-free
//! linear integer arithmetic condition, and the angular-component tuple
//! modulo `p^M` lying in a finite subgroup table, where `M = 2 ord_p(d) + e`
//! for the chosen minor determinant `d` (raised to at least 3 when `p = 2`).

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use thiserror::Error;

use crate::lifting::{self, LiftError, LiftProblem};
use crate::monomial::{BallDomain, CoordinateTag, MonomialError, MonomialMap, MinorChoice, StandardDomain};
use crate::padic::{self, PAdicError, PAdicNumber, UnitResidue, Valuation};
use crate::presburger::{self, EliminationConfig, PresburgerError};
use crate::semialg::{self, LowerError, OrdCong, Polynomial, SemiAlgFormula};
use crate::unitgroup::{self, SubgroupTable, UnitGroupError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("enumeration of {need} classes exceeds the cap {cap}")]
    EnumerationTooLarge { need: u128, cap: u64 },
    #[error("rendered formula would exceed {0} nodes")]
    RenderTooLarge(u64),
    #[error(transparent)]
    Monomial(#[from] MonomialError),
    #[error(transparent)]
    UnitGroup(#[from] UnitGroupError),
    #[error(transparent)]
    Presburger(#[from] PresburgerError),
    #[error(transparent)]
    Lower(#[from] LowerError),
    #[error(transparent)]
    Padic(#[from] PAdicError),
    #[error(transparent)]
    Lift(#[from] LiftError),
}

pub type Result<T> = std::result::Result<T, ImageError>;

/// Resource caps for description computation and oracle enumeration.
#[derive(Debug, Clone)]
pub struct Limits {
    /// Cap on subgroup table size (tuples).
    pub subgroup_cap: u64,
    /// Cap on brute-force enumeration work (classes visited).
    pub enumeration_cap: u64,
    /// Cap on Presburger formula nodes during elimination.
    pub formula_nodes: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            subgroup_cap: unitgroup::DEFAULT_TABLE_CAP,
            enumeration_cap: 100_000_000,
            formula_nodes: 1_000_000,
        }
    }
}

/// The quantifier-free image certificate.
#[derive(Debug, Clone)]
pub struct ImageDescription {
    p: u64,
    map: MonomialMap,
    domain: StandardDomain,
    minor: MinorChoice,
    ideal_exp: u32,
    modulus_exp: u32,
    valuation_formula: presburger::Formula,
    angular_set: SubgroupTable,
    extended_formula: SemiAlgFormula,
    lowered_formula: SemiAlgFormula,
}

/// Compute the image description of `map` on `domain` over `Q_p`.
pub fn compute_image(
    map: &MonomialMap,
    domain: &StandardDomain,
    p: u64,
) -> Result<ImageDescription> {
    compute_image_with(map, domain, p, &Limits::default())
}

pub fn compute_image_with(
    map: &MonomialMap,
    domain: &StandardDomain,
    p: u64,
    limits: &Limits,
) -> Result<ImageDescription> {
    padic::check_prime(p)?;
    if domain.dim() != map.cols() {
        return Err(ImageError::DimensionMismatch {
            expected: map.cols(),
            got: domain.dim(),
        });
    }
    let minor = map.select_minor(p);
    let e = domain.ideal_exp();
    let a = padic::int_ord_u64(minor.det_abs(), p) as u32;
    let mut modulus_exp = 2 * a + e;
    if p == 2 {
        // The lowering exponent 2^(M-2) must be meaningful; a finer modulus
        // refines the angular condition and preserves the decision.
        modulus_exp = modulus_exp.max(3);
    }

    let config = EliminationConfig {
        max_nodes: limits.formula_nodes,
    };
    let valuation_formula =
        presburger::valuation_image_formula_with(map, domain.tags(), &config)?;
    let angular_set = unitgroup::image_subgroup_capped(
        map,
        domain.tags(),
        p,
        modulus_exp,
        e,
        limits.subgroup_cap,
    )?;

    let extended_formula = render_extended(
        map.rows(),
        p,
        modulus_exp,
        &valuation_formula,
        &angular_set,
        limits,
    )?;
    let lowered_formula = semialg::lower(&extended_formula, p, map.rows())?;

    Ok(ImageDescription {
        p,
        map: map.clone(),
        domain: domain.clone(),
        minor,
        ideal_exp: e,
        modulus_exp,
        valuation_formula,
        angular_set,
        extended_formula,
        lowered_formula,
    })
}

/// Rendered formula: nonvanishing of every coordinate, the valuation
/// condition translated to ord atoms, and the angular condition as a
/// disjunction over the subgroup table.
fn render_extended(
    m: usize,
    p: u64,
    modulus_exp: u32,
    valuation_formula: &presburger::Formula,
    angular_set: &SubgroupTable,
    limits: &Limits,
) -> Result<SemiAlgFormula> {
    let mut conjuncts: Vec<SemiAlgFormula> = Vec::new();
    for j in 0..m {
        conjuncts.push(SemiAlgFormula::not(SemiAlgFormula::PolyEq(
            Polynomial::var(m, j),
        )));
    }
    conjuncts.push(translate_valuation_formula(valuation_formula, m, p)?);

    let render_cost = (angular_set.len() as u64).saturating_mul(m as u64);
    if render_cost > limits.formula_nodes {
        return Err(ImageError::RenderTooLarge(limits.formula_nodes));
    }
    let mut angular = Vec::with_capacity(angular_set.len());
    for tuple in angular_set.sorted_elements() {
        let conj: Vec<SemiAlgFormula> = tuple
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                UnitResidue::new(p, modulus_exp, BigUint::from(c))
                    .map(|r| SemiAlgFormula::AcEq(j, r))
            })
            .collect::<padic::Result<_>>()?;
        angular.push(SemiAlgFormula::and(conj));
    }
    conjuncts.push(SemiAlgFormula::or(angular));
    Ok(SemiAlgFormula::and(conjuncts))
}

fn w_index(name: &str, m: usize) -> Option<usize> {
    let k: usize = name.strip_prefix('w')?.parse().ok()?;
    (1..=m).contains(&k).then(|| k - 1)
}

/// Translate a quantifier-free formula over `w_j = ord(y_j)` into extended
/// semi-algebraic atoms: inequalities become valuation comparisons of
/// monomials, divisibilities become valuation congruences.
fn translate_valuation_formula(
    f: &presburger::Formula,
    m: usize,
    p: u64,
) -> Result<SemiAlgFormula> {
    use presburger::{Atom, Formula};
    Ok(match f {
        Formula::True => SemiAlgFormula::True,
        Formula::False => SemiAlgFormula::False,
        Formula::Not(g) => SemiAlgFormula::not(translate_valuation_formula(g, m, p)?),
        Formula::And(fs) => SemiAlgFormula::and(
            fs.iter()
                .map(|g| translate_valuation_formula(g, m, p))
                .collect::<Result<_>>()?,
        ),
        Formula::Or(fs) => SemiAlgFormula::or(
            fs.iter()
                .map(|g| translate_valuation_formula(g, m, p))
                .collect::<Result<_>>()?,
        ),
        Formula::Exists(..) => unreachable!("valuation formula is quantifier-free"),
        Formula::Atom(atom) => match atom {
            Atom::Geq(t) => ord_compare_atom(t, m, p)?,
            Atom::Eq(t) => {
                let le = ord_compare_atom(t, m, p)?;
                let ge = ord_compare_atom(&t.negate()?, m, p)?;
                SemiAlgFormula::and(vec![le, ge])
            }
            Atom::Divides(s, t) => {
                let mut coeffs = vec![0i64; m];
                for (name, c) in t.coeffs() {
                    let j = w_index(name, m).expect("valuation variable out of range");
                    coeffs[j] = c;
                }
                SemiAlgFormula::OrdCong(OrdCong::new(coeffs, t.constant_part(), 0, *s))
            }
        },
    })
}

/// `sum c_j w_j + k >= 0` as `ord(negative part) <= ord(positive part)`.
fn ord_compare_atom(t: &presburger::LinearTerm, m: usize, p: u64) -> Result<SemiAlgFormula> {
    let mut pos = vec![0u32; m];
    let mut neg = vec![0u32; m];
    for (name, c) in t.coeffs() {
        let j = w_index(name, m).expect("valuation variable out of range");
        if c >= 0 {
            pos[j] = u32::try_from(c).map_err(|_| PresburgerError::Overflow)?;
        } else {
            neg[j] = u32::try_from(-c).map_err(|_| PresburgerError::Overflow)?;
        }
    }
    let k = t.constant_part();
    let k_pos = u32::try_from(k.max(0)).map_err(|_| PresburgerError::Overflow)?;
    let k_neg = u32::try_from((-k).max(0)).map_err(|_| PresburgerError::Overflow)?;
    let p_big = BigInt::from(p);
    let f = Polynomial::monomial(
        m,
        pos,
        BigRational::from_integer(p_big.pow(k_pos)),
    );
    let g = Polynomial::monomial(
        m,
        neg,
        BigRational::from_integer(p_big.pow(k_neg)),
    );
    Ok(SemiAlgFormula::OrdLe(g, f))
}

impl ImageDescription {
    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn map(&self) -> &MonomialMap {
        &self.map
    }

    pub fn domain(&self) -> &StandardDomain {
        &self.domain
    }

    pub fn minor(&self) -> &MinorChoice {
        &self.minor
    }

    pub fn ideal_exp(&self) -> u32 {
        self.ideal_exp
    }

    /// `M`: angular components are tracked modulo `p^M`.
    pub fn modulus_exp(&self) -> u32 {
        self.modulus_exp
    }

    pub fn valuation_formula(&self) -> &presburger::Formula {
        &self.valuation_formula
    }

    pub fn angular_set(&self) -> &SubgroupTable {
        &self.angular_set
    }

    pub fn extended_formula(&self) -> &SemiAlgFormula {
        &self.extended_formula
    }

    pub fn lowered_formula(&self) -> &SemiAlgFormula {
        &self.lowered_formula
    }

    /// Decide membership of `y` in the image. Coordinates must carry at
    /// least `M` digits; zero coordinates decide negatively, since images of
    /// hyperplane-free domains contain none.
    pub fn decide_membership(&self, y: &[PAdicNumber]) -> Result<bool> {
        let (w, ac) = match self.classify(y)? {
            Some(class) => class,
            None => return Ok(false),
        };
        let assignment = w_assignment(&w);
        if !self.valuation_formula.evaluate(&assignment)? {
            return Ok(false);
        }
        Ok(self.angular_set.contains(&ac))
    }

    /// The class `(ord y, ac_M y)` of a query point, or `None` if some
    /// coordinate is zero.
    fn classify(&self, y: &[PAdicNumber]) -> Result<Option<(Vec<i64>, Vec<u64>)>> {
        if y.len() != self.map.rows() {
            return Err(ImageError::DimensionMismatch {
                expected: self.map.rows(),
                got: y.len(),
            });
        }
        let mut w = Vec::with_capacity(y.len());
        let mut ac = Vec::with_capacity(y.len());
        for yj in y {
            if yj.prime() != self.p {
                return Err(PAdicError::PrimeMismatch(yj.prime(), self.p).into());
            }
            match yj.ord() {
                Valuation::Infinite => return Ok(None),
                Valuation::Finite(v) => w.push(v),
            }
            ac.push(yj.ac_mod(self.modulus_exp)?.value_u64());
        }
        Ok(Some((w, ac)))
    }

    /// Produce an exact preimage of `y` at the requested precision, or
    /// `None` when `y` is not in the image.
    pub fn find_preimage(
        &self,
        y: &[PAdicNumber],
        target_prec: u32,
    ) -> Result<Option<Vec<PAdicNumber>>> {
        if !self.decide_membership(y)? {
            return Ok(None);
        }
        let (w, ac) = self.classify(y)?.expect("membership implies nonzero");

        let v = self
            .valuation_witness(&w)
            .expect("valuation formula accepted w, so a bounded witness exists");
        let units = self
            .angular_set
            .member_witness(&ac)
            .expect("angular set accepted the tuple");

        let prec = target_prec
            .max(self.modulus_exp)
            .max(y.iter().map(|x| x.precision()).max().unwrap_or(1));
        let p_big = BigInt::from(self.p);
        let mut approx = Vec::with_capacity(self.map.cols());
        for (vi, ui) in v.iter().zip(&units) {
            let value = p_big.pow(u32::try_from(*vi).expect("witness valuation fits u32"))
                * BigInt::from(*ui);
            approx.push(PAdicNumber::from_rational(
                &value,
                &BigInt::from(1),
                self.p,
                prec,
            )?);
        }
        let problem = LiftProblem::new(
            self.map.clone(),
            self.minor.clone(),
            self.ideal_exp,
            y.to_vec(),
            approx,
            target_prec,
        )?;
        let x = lifting::lift_solution(&problem)?;
        debug_assert!(self.domain.contains(&x, self.p)?);
        Ok(Some(x))
    }

    /// Bounded search for `v >= 0` with `A v = w`, `v_i = 0` on unit-ball and
    /// all-zero columns. Entry non-negativity bounds each `v_i` on a column
    /// with some `a_ji > 0` by `min_j floor(w_j / a_ji)`.
    fn valuation_witness(&self, w: &[i64]) -> Option<Vec<i64>> {
        let n = self.map.cols();
        let mut v = vec![0i64; n];
        let mut residual = w.to_vec();
        if residual.iter().any(|&x| x < 0) {
            return None;
        }
        self.witness_search(0, &mut v, &mut residual)
    }

    fn witness_search(
        &self,
        col: usize,
        v: &mut Vec<i64>,
        residual: &mut Vec<i64>,
    ) -> Option<Vec<i64>> {
        if col == self.map.cols() {
            return residual.iter().all(|&r| r == 0).then(|| v.clone());
        }
        let fixed = self.domain.tag(col) == CoordinateTag::UnitBall
            || self.map.column_is_zero(col);
        let bound = if fixed {
            0
        } else {
            (0..self.map.rows())
                .filter(|&j| self.map.entry(j, col) > 0)
                .map(|j| residual[j] / self.map.entry(j, col) as i64)
                .min()
                .unwrap_or(0)
        };
        for value in 0..=bound {
            v[col] = value;
            let mut ok = true;
            for j in 0..self.map.rows() {
                residual[j] -= self.map.entry(j, col) as i64 * value;
                if residual[j] < 0 {
                    ok = false;
                }
            }
            if ok {
                if let Some(found) = self.witness_search(col + 1, v, residual) {
                    return Some(found);
                }
            }
            for j in 0..self.map.rows() {
                residual[j] += self.map.entry(j, col) as i64 * value;
            }
        }
        v[col] = 0;
        None
    }
}

fn w_assignment(w: &[i64]) -> std::collections::BTreeMap<String, i64> {
    w.iter()
        .enumerate()
        .map(|(j, &v)| (format!("w{}", j + 1), v))
        .collect()
}

/// A finite window of classes: valuations in `[lo_j, hi_j]` per coordinate,
/// angular residues modulo `p^modulus_exp`.
#[derive(Debug, Clone)]
pub struct ClassBox {
    lo: Vec<i64>,
    hi: Vec<i64>,
    modulus_exp: u32,
}

impl ClassBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>, modulus_exp: u32) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(a, b)| a <= b), "empty box");
        ClassBox { lo, hi, modulus_exp }
    }

    /// The box `[0, max]^m` at modulus exponent `modulus_exp`.
    pub fn uniform(m: usize, max: i64, modulus_exp: u32) -> Self {
        Self::new(vec![0; m], vec![max; m], modulus_exp)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn modulus_exp(&self) -> u32 {
        self.modulus_exp
    }

    pub fn contains_w(&self, w: &[i64]) -> bool {
        w.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (lo, hi))| lo <= x && x <= hi)
    }
}

/// Enumerate the image classes `(ord y, ac_M y)` inside the box by walking
/// every domain class directly: valuations over the bounded grid, unit
/// residues over the full residue system. Completely independent of the
/// description machinery.
pub fn brute_force_image(
    map: &MonomialMap,
    domain: &StandardDomain,
    class_box: &ClassBox,
    p: u64,
) -> Result<BTreeSet<(Vec<i64>, Vec<u64>)>> {
    brute_force_image_with(map, domain, class_box, p, &Limits::default())
}

pub fn brute_force_image_with(
    map: &MonomialMap,
    domain: &StandardDomain,
    class_box: &ClassBox,
    p: u64,
    limits: &Limits,
) -> Result<BTreeSet<(Vec<i64>, Vec<u64>)>> {
    padic::check_prime(p)?;
    if domain.dim() != map.cols() {
        return Err(ImageError::DimensionMismatch {
            expected: map.cols(),
            got: domain.dim(),
        });
    }
    if class_box.dim() != map.rows() {
        return Err(ImageError::DimensionMismatch {
            expected: map.rows(),
            got: class_box.dim(),
        });
    }
    let m_exp = class_box.modulus_exp();
    let q = {
        let mut q: u64 = 1;
        for _ in 0..m_exp {
            q = q
                .checked_mul(p)
                .ok_or(UnitGroupError::CapExceeded(u64::MAX, limits.enumeration_cap))?;
        }
        q
    };
    let e = domain.ideal_exp().min(m_exp);

    // Valuation range per column: 0 for unit-ball and absent columns, else
    // bounded by entry non-negativity against the box maxima.
    let hi_max = class_box.hi.iter().copied().max().unwrap_or(0).max(0);
    let v_ranges: Vec<i64> = (0..map.cols())
        .map(|i| {
            if domain.tag(i) == CoordinateTag::UnitBall || map.column_is_zero(i) {
                0
            } else {
                (0..map.rows())
                    .filter(|&j| map.entry(j, i) > 0)
                    .map(|j| class_box.hi[j].max(0) / map.entry(j, i) as i64)
                    .min()
                    .unwrap_or(hi_max)
            }
        })
        .collect();

    // Residue choices per column.
    let residues: Vec<Vec<u64>> = (0..map.cols())
        .map(|i| {
            if map.column_is_zero(i) {
                Ok(vec![1])
            } else {
                match domain.tag(i) {
                    CoordinateTag::Full => {
                        unitgroup::unit_group_capped(p, m_exp, limits.enumeration_cap)
                    }
                    CoordinateTag::UnitBall => {
                        unitgroup::one_plus_ideal(p, m_exp, e, limits.enumeration_cap)
                    }
                }
            }
        })
        .collect::<unitgroup::Result<_>>()?;

    let mut work: u128 = 1;
    for &r in &v_ranges {
        work = work.saturating_mul(r as u128 + 1);
    }
    for rs in &residues {
        work = work.saturating_mul(rs.len() as u128);
    }
    if work > limits.enumeration_cap as u128 {
        return Err(ImageError::EnumerationTooLarge {
            need: work,
            cap: limits.enumeration_cap,
        });
    }

    // Precompute residue^entry tables per column and row.
    let powered: Vec<Vec<Vec<u64>>> = (0..map.cols())
        .map(|i| {
            (0..map.rows())
                .map(|j| {
                    residues[i]
                        .iter()
                        .map(|&u| padic::pow_mod_u64(u, map.entry(j, i), q))
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut classes = BTreeSet::new();
    let mut v = vec![0i64; map.cols()];
    let mut u_idx = vec![0usize; map.cols()];
    'outer: loop {
        // w = A v, checked against the box
        let mut w = vec![0i64; map.rows()];
        for j in 0..map.rows() {
            for i in 0..map.cols() {
                w[j] += map.entry(j, i) as i64 * v[i];
            }
        }
        if class_box.contains_w(&w) {
            // all residue combinations for this valuation pattern
            loop {
                let mut ac = vec![1u64; map.rows()];
                for j in 0..map.rows() {
                    for i in 0..map.cols() {
                        ac[j] = (ac[j] as u128 * powered[i][j][u_idx[i]] as u128 % q as u128)
                            as u64;
                    }
                }
                classes.insert((w.clone(), ac));
                // advance residue odometer
                let mut k = map.cols();
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    u_idx[k] += 1;
                    if u_idx[k] < residues[k].len() {
                        break;
                    }
                    u_idx[k] = 0;
                }
                if u_idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
        // advance valuation odometer
        let mut k = map.cols();
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            v[k] += 1;
            if v[k] <= v_ranges[k] {
                break;
            }
            v[k] = 0;
        }
    }
    Ok(classes)
}

/// Result of checking a description against the brute-force oracle on a box.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub classes_checked: u64,
    pub mismatches: u64,
    /// Up to ten offending classes, for diagnostics.
    pub examples: Vec<String>,
}

/// Compare `decide_membership` with the enumeration oracle on every class of
/// the box; the description is sound and complete there iff no mismatches.
pub fn verify_against_oracle(
    desc: &ImageDescription,
    class_box: &ClassBox,
    limits: &Limits,
) -> Result<VerifyReport> {
    assert_eq!(
        class_box.modulus_exp(),
        desc.modulus_exp(),
        "oracle box must use the description's modulus"
    );
    let reachable = brute_force_image_with(desc.map(), desc.domain(), class_box, desc.prime(), limits)?;
    let units = unitgroup::unit_group_capped(desc.prime(), desc.modulus_exp(), limits.enumeration_cap)?;
    let m = desc.map().rows();

    let mut classes_checked = 0u64;
    let mut mismatches = 0u64;
    let mut examples = Vec::new();

    // Walk the full (w, ac) grid.
    let mut w = class_box.lo.clone();
    'w_loop: loop {
        let mut ac_idx = vec![0usize; m];
        loop {
            let ac: Vec<u64> = ac_idx.iter().map(|&i| units[i]).collect();
            let y: Vec<PAdicNumber> = w
                .iter()
                .zip(&ac)
                .map(|(&v, &u)| {
                    PAdicNumber::from_unit_class(
                        desc.prime(),
                        v,
                        BigUint::from(u),
                        desc.modulus_exp(),
                    )
                })
                .collect::<padic::Result<_>>()?;
            let decided = desc.decide_membership(&y)?;
            let enumerated = reachable.contains(&(w.clone(), ac.clone()));
            classes_checked += 1;
            if decided != enumerated {
                mismatches += 1;
                if examples.len() < 10 {
                    examples.push(format!(
                        "w = {w:?}, ac = {ac:?}: decided {decided}, oracle {enumerated}"
                    ));
                }
            }
            // advance ac odometer
            let mut k = m;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                ac_idx[k] += 1;
                if ac_idx[k] < units.len() {
                    break;
                }
                ac_idx[k] = 0;
            }
            if ac_idx.iter().all(|&i| i == 0) {
                break;
            }
        }
        // advance w odometer
        let mut k = m;
        loop {
            if k == 0 {
                break 'w_loop;
            }
            k -= 1;
            w[k] += 1;
            if w[k] <= class_box.hi[k] {
                break;
            }
            w[k] = class_box.lo[k];
        }
    }
    Ok(VerifyReport {
        classes_checked,
        mismatches,
        examples,
    })
}

/// One normalized piece of a ball image: the coordinate substitution
/// `x = coordinate_scale * x'`, the induced scale on the image side, and the
/// description of the standard-domain image.
#[derive(Debug, Clone)]
pub struct BallPiece {
    pub coordinate_scale: Vec<BigRational>,
    pub image_scale: Vec<BigRational>,
    pub description: ImageDescription,
}

/// The image description of a ball minus the coordinate hyperplanes: one
/// piece per normalized standard domain. A point is in the image iff it is
/// in some piece's image after dividing by that piece's image scale.
#[derive(Debug, Clone)]
pub struct BallImageDescription {
    pieces: Vec<BallPiece>,
}

impl BallImageDescription {
    pub fn compute(
        map: &MonomialMap,
        ball: &BallDomain,
        p: u64,
        limits: &Limits,
    ) -> Result<Self> {
        if ball.dim() != map.cols() {
            return Err(ImageError::DimensionMismatch {
                expected: map.cols(),
                got: ball.dim(),
            });
        }
        let mut pieces = Vec::new();
        for piece in crate::monomial::normalize_domain(ball, p)? {
            let description = compute_image_with(map, &piece.domain, p, limits)?;
            // image of the scale vector: y_scale_j = prod_i scale_i^{a_ji}
            let mut image_scale = Vec::with_capacity(map.rows());
            for j in 0..map.rows() {
                let mut s = BigRational::from_integer(BigInt::from(1));
                for i in 0..map.cols() {
                    let a = map.entry(j, i);
                    if a > 0 {
                        let base = &piece.scale[i];
                        let powed = BigRational::new(
                            base.numer().pow(a as u32),
                            base.denom().pow(a as u32),
                        );
                        s *= powed;
                    }
                }
                image_scale.push(s);
            }
            pieces.push(BallPiece {
                coordinate_scale: piece.scale,
                image_scale,
                description,
            });
        }
        Ok(BallImageDescription { pieces })
    }

    pub fn pieces(&self) -> &[BallPiece] {
        &self.pieces
    }

    /// `y` divided coordinatewise by the piece's image scale.
    fn unscale(&self, piece: &BallPiece, y: &[PAdicNumber]) -> Result<Vec<PAdicNumber>> {
        let mut scaled = Vec::with_capacity(y.len());
        for (yj, s) in y.iter().zip(&piece.image_scale) {
            let s_val = PAdicNumber::from_big_rational(
                s.clone(),
                piece.description.prime(),
                yj.precision().max(piece.description.modulus_exp()),
            )?;
            scaled.push(yj.div(&s_val)?);
        }
        Ok(scaled)
    }

    /// Membership in the union of the piecewise images.
    pub fn decide_membership(&self, y: &[PAdicNumber]) -> Result<bool> {
        for piece in &self.pieces {
            let scaled = self.unscale(piece, y)?;
            if piece.description.decide_membership(&scaled)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// An exact preimage inside the ball, through the first accepting piece.
    pub fn find_preimage(
        &self,
        y: &[PAdicNumber],
        target_prec: u32,
    ) -> Result<Option<Vec<PAdicNumber>>> {
        for piece in &self.pieces {
            let scaled = self.unscale(piece, y)?;
            if let Some(x_std) = piece.description.find_preimage(&scaled, target_prec)? {
                let p = piece.description.prime();
                let mut x = Vec::with_capacity(x_std.len());
                for (xi, s) in x_std.iter().zip(&piece.coordinate_scale) {
                    let s_val = PAdicNumber::from_big_rational(
                        s.clone(),
                        p,
                        xi.precision().max(target_prec),
                    )?;
                    x.push(xi.mul(&s_val)?);
                }
                return Ok(Some(x));
            }
        }
        Ok(None)
    }
}
