//! Monomial maps `y_j = prod_i x_i^{a_ji}` and the normalization of p-adic
//! balls (minus the coordinate hyperplanes) into standard domains
//! `(Z_p \ {0})^k x (1 + p^e Z_p)^{n-k}` by covering and scaling.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::linalg;
use crate::padic::{self, PAdicError, PAdicNumber, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonomialError {
    #[error("matrix entry at row {row}, column {col} is negative")]
    NegativeEntry { row: usize, col: usize },
    #[error("matrix has rank {rank}, expected full row rank {rows}")]
    RankDeficient { rank: usize, rows: usize },
    #[error("matrix has {rows} rows but only {cols} columns")]
    TooManyRows { rows: usize, cols: usize },
    #[error("matrix must be non-empty and rectangular")]
    MalformedMatrix,
    #[error("monomial maps are only defined away from the coordinate hyperplanes")]
    ZeroCoordinate,
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ideal exponent must be at least 1")]
    InvalidIdealExponent,
    #[error(transparent)]
    Padic(#[from] PAdicError),
}

pub type Result<T> = std::result::Result<T, MonomialError>;

/// Tag for one coordinate of a standard domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoordinateTag {
    /// `x_i` ranges over `Z_p \ {0}`.
    Full,
    /// `x_i` ranges over `1 + p^e Z_p`.
    UnitBall,
}

/// A validated exponent matrix: non-negative entries, full row rank, `m <= n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialMap {
    entries: Vec<Vec<u64>>,
    rows: usize,
    cols: usize,
}

impl MonomialMap {
    pub fn new(matrix: Vec<Vec<i64>>) -> Result<Self> {
        let rows = matrix.len();
        if rows == 0 || matrix[0].is_empty() {
            return Err(MonomialError::MalformedMatrix);
        }
        let cols = matrix[0].len();
        if matrix.iter().any(|r| r.len() != cols) {
            return Err(MonomialError::MalformedMatrix);
        }
        for (i, row) in matrix.iter().enumerate() {
            for (j, &entry) in row.iter().enumerate() {
                if entry < 0 {
                    return Err(MonomialError::NegativeEntry { row: i, col: j });
                }
            }
        }
        if rows > cols {
            return Err(MonomialError::TooManyRows { rows, cols });
        }
        let big: Vec<Vec<BigInt>> = matrix
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let rank = linalg::rank(&big);
        if rank != rows {
            return Err(MonomialError::RankDeficient { rank, rows });
        }
        let entries = matrix
            .into_iter()
            .map(|r| r.into_iter().map(|x| x as u64).collect())
            .collect();
        Ok(MonomialMap { entries, rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, row: usize, col: usize) -> u64 {
        self.entries[row][col]
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.entries[row]
    }

    pub fn entries(&self) -> &[Vec<u64>] {
        &self.entries
    }

    /// Whether column `col` is identically zero (the variable does not occur).
    pub fn column_is_zero(&self, col: usize) -> bool {
        (0..self.rows).all(|r| self.entries[r][col] == 0)
    }

    /// Among all invertible `m x m` minors, the one minimizing `ord_p(|det|)`,
    /// tie-broken by smallest `|det|`, then lexicographically smallest column
    /// set. Validity of the map guarantees one exists.
    pub fn select_minor(&self, p: u64) -> MinorChoice {
        let mut best: Option<(u64, u64, Vec<usize>)> = None;
        for_each_combination(self.cols, self.rows, |cols| {
            let sub: Vec<Vec<BigInt>> = (0..self.rows)
                .map(|r| cols.iter().map(|&c| BigInt::from(self.entries[r][c])).collect())
                .collect();
            let d = linalg::det(&sub).abs();
            if d.is_zero() {
                return;
            }
            let d = d.to_u64().expect("minor determinant exceeds u64");
            let key = (padic::int_ord_u64(d, p), d);
            // Lexicographic iteration order makes strict `<` keep the
            // lexicographically smallest column set among ties.
            if best.as_ref().map(|(o, dd, _)| key < (*o, *dd)).unwrap_or(true) {
                best = Some((key.0, key.1, cols.to_vec()));
            }
        });
        let (_, det_abs, columns) = best.expect("full row rank guarantees an invertible minor");
        MinorChoice { columns, det_abs }
    }

    /// Evaluate the map at a point with all coordinates nonzero.
    pub fn apply(&self, x: &[PAdicNumber]) -> Result<Vec<PAdicNumber>> {
        if x.len() != self.cols {
            return Err(MonomialError::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        if x.iter().any(|xi| xi.is_exact_zero()) {
            return Err(MonomialError::ZeroCoordinate);
        }
        let mut out = Vec::with_capacity(self.rows);
        for j in 0..self.rows {
            let mut acc = PAdicNumber::one(x[0].prime(), x[0].precision().max(1))?;
            for (i, xi) in x.iter().enumerate() {
                let a = self.entries[j][i];
                if a == 0 {
                    continue;
                }
                acc = acc.mul(&xi.pow(a as i64)?)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// The selected square submatrix, columns in the order given by `minor`.
    pub fn minor_matrix(&self, minor: &MinorChoice) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|r| {
                minor
                    .columns
                    .iter()
                    .map(|&c| BigInt::from(self.entries[r][c]))
                    .collect()
            })
            .collect()
    }
}

/// A choice of invertible `m x m` minor together with `d = |det|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinorChoice {
    columns: Vec<usize>,
    det_abs: u64,
}

impl MinorChoice {
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn det_abs(&self) -> u64 {
        self.det_abs
    }
}

/// The normalized domain `(Z_p \ {0})^k x (1 + p^e Z_p)^{n-k}`, described by
/// one tag per coordinate and a shared ideal exponent `e >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardDomain {
    tags: Vec<CoordinateTag>,
    e: u32,
}

impl StandardDomain {
    pub fn new(tags: Vec<CoordinateTag>, e: u32) -> Result<Self> {
        if e == 0 {
            return Err(MonomialError::InvalidIdealExponent);
        }
        if tags.is_empty() {
            return Err(MonomialError::MalformedMatrix);
        }
        Ok(StandardDomain { tags, e })
    }

    pub fn full(n: usize, e: u32) -> Result<Self> {
        Self::new(vec![CoordinateTag::Full; n], e)
    }

    pub fn tags(&self) -> &[CoordinateTag] {
        &self.tags
    }

    pub fn tag(&self, i: usize) -> CoordinateTag {
        self.tags[i]
    }

    pub fn dim(&self) -> usize {
        self.tags.len()
    }

    pub fn ideal_exp(&self) -> u32 {
        self.e
    }

    /// Whether a point with all coordinates nonzero lies in the domain.
    pub fn contains(&self, x: &[PAdicNumber], p: u64) -> Result<bool> {
        if x.len() != self.tags.len() {
            return Err(MonomialError::DimensionMismatch {
                expected: self.tags.len(),
                got: x.len(),
            });
        }
        for (xi, tag) in x.iter().zip(&self.tags) {
            if xi.prime() != p {
                return Err(PAdicError::PrimeMismatch(xi.prime(), p).into());
            }
            match tag {
                CoordinateTag::Full => match xi.ord() {
                    Valuation::Finite(v) if v >= 0 => {}
                    _ => return Ok(false),
                },
                CoordinateTag::UnitBall => {
                    if xi.ord() != Valuation::Finite(0) {
                        return Ok(false);
                    }
                    if xi.unit_mod(self.e)? != BigUint::one() {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// A p-adic ball `center + p^R Z_p^n`, implicitly minus the coordinate
/// hyperplanes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallDomain {
    center: Vec<BigRational>,
    radius_exp: u32,
}

impl BallDomain {
    pub fn new(center: Vec<BigRational>, radius_exp: u32) -> Result<Self> {
        if center.is_empty() {
            return Err(MonomialError::MalformedMatrix);
        }
        Ok(BallDomain { center, radius_exp })
    }

    pub fn center(&self) -> &[BigRational] {
        &self.center
    }

    pub fn radius_exp(&self) -> u32 {
        self.radius_exp
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Whether an exact rational point lies in the ball with no zero coordinate.
    pub fn contains(&self, x: &[BigRational], p: u64) -> bool {
        x.len() == self.center.len()
            && x.iter().all(|xi| !xi.is_zero())
            && x.iter().zip(&self.center).all(|(xi, ci)| {
                match padic::rational_ord(&(xi - ci), p) {
                    Valuation::Infinite => true,
                    Valuation::Finite(v) => v >= self.radius_exp as i64,
                }
            })
    }
}

/// One piece of a normalized ball: substituting `x_i = scale_i * x'_i` maps
/// the standard domain bijectively onto part of the ball minus hyperplanes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainPiece {
    pub scale: Vec<BigRational>,
    pub domain: StandardDomain,
}

/// Decompose a ball minus the coordinate hyperplanes into scaled standard
/// domains. Coordinates where the center dominates the radius become unit
/// balls around the center; the rest become full punctured coordinates at
/// scale `p^R`. Unit-ball coordinates with different natural exponents are
/// unified to the maximum by covering the coarser ones with cosets.
pub fn normalize_domain(ball: &BallDomain, p: u64) -> Result<Vec<DomainPiece>> {
    padic::check_prime(p)?;
    let r = ball.radius_exp as i64;
    let big_p = BigInt::from(p);

    enum Coord {
        Full,
        UnitBall { e: u32 },
    }

    let mut coords = Vec::with_capacity(ball.dim());
    let mut base_scale = Vec::with_capacity(ball.dim());
    for c in ball.center() {
        match padic::rational_ord(c, p) {
            Valuation::Finite(v) if v < r => {
                coords.push(Coord::UnitBall { e: (r - v) as u32 });
                base_scale.push(c.clone());
            }
            _ => {
                // center_i lies in p^R Z_p: the coordinate is a scaled punctured disk
                coords.push(Coord::Full);
                base_scale.push(BigRational::from_integer(big_p.pow(ball.radius_exp)));
            }
        }
    }

    let e = coords
        .iter()
        .filter_map(|c| match c {
            Coord::UnitBall { e } => Some(*e),
            Coord::Full => None,
        })
        .max()
        .unwrap_or(1);

    // Coset representatives of (1 + p^{e_i} Z_p) / (1 + p^e Z_p) per coordinate.
    let mut coset_reps: Vec<Vec<BigRational>> = Vec::with_capacity(ball.dim());
    let mut piece_count: u64 = 1;
    for c in &coords {
        let reps = match c {
            Coord::Full => vec![BigRational::one()],
            Coord::UnitBall { e: ei } => {
                let count = p.checked_pow(e - ei).expect("coset count overflow");
                let step = BigInt::from(p).pow(*ei);
                (0..count)
                    .map(|t| BigRational::from_integer(BigInt::one() + &step * BigInt::from(t)))
                    .collect()
            }
        };
        piece_count = piece_count
            .checked_mul(reps.len() as u64)
            .expect("piece count overflow");
        coset_reps.push(reps);
    }
    assert!(
        piece_count <= 1 << 22,
        "ball normalization would produce {piece_count} pieces"
    );

    let tags: Vec<CoordinateTag> = coords
        .iter()
        .map(|c| match c {
            Coord::Full => CoordinateTag::Full,
            Coord::UnitBall { .. } => CoordinateTag::UnitBall,
        })
        .collect();
    let domain = StandardDomain::new(tags, e)?;

    let mut pieces = Vec::with_capacity(piece_count as usize);
    let mut indices = vec![0usize; ball.dim()];
    loop {
        let scale: Vec<BigRational> = base_scale
            .iter()
            .zip(&coset_reps)
            .zip(&indices)
            .map(|((s, reps), &i)| s * &reps[i])
            .collect();
        pieces.push(DomainPiece {
            scale,
            domain: domain.clone(),
        });
        // odometer increment
        let mut k = ball.dim();
        loop {
            if k == 0 {
                return Ok(pieces);
            }
            k -= 1;
            indices[k] += 1;
            if indices[k] < coset_reps[k].len() {
                break;
            }
            indices[k] = 0;
        }
    }
}

/// Visit all `m`-element subsets of `{0, .., n-1}` in lexicographic order.
pub(crate) fn for_each_combination(n: usize, m: usize, mut visit: impl FnMut(&[usize])) {
    debug_assert!(m <= n && m > 0);
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        visit(&idx);
        // advance
        let mut k = m;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if idx[k] < n - (m - k) {
                idx[k] += 1;
                for j in k + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}
