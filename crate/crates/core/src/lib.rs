//! Computational kernel for deciding membership in images of monomial maps
//! over the p-adic numbers.
//!
//! Given a monomial map `y_j = prod_i x_i^{a_ji}` with a non-negative integer
//! exponent matrix of full row rank, and a domain of the shape
//! `(Z_p \ {0})^k x (1 + p^e Z_p)^{n-k}` (or a p-adic ball minus the
//! coordinate hyperplanes, which normalizes to finitely many such pieces),
//! this crate computes a quantifier-free description of the image: a linear
//! integer arithmetic condition on the valuations of `y`, together with a
//! finite set of allowed angular-component tuples modulo a prime power. The
//! description renders as a boolean combination of polynomial equalities and
//! power predicates, membership is decidable from finitely many digits of
//! `y`, and positive answers come with exact preimages produced by Hensel
//! lifting. Everything is cross-checkable against a brute-force enumeration
//! oracle.

pub mod image;
pub mod lifting;
mod linalg;
pub mod monomial;
pub mod padic;
pub mod presburger;
pub mod semialg;
pub mod unitgroup;

pub use image::{ClassBox, ImageDescription, Limits};
pub use lifting::LiftProblem;
pub use monomial::{BallDomain, CoordinateTag, MinorChoice, MonomialMap, StandardDomain};
pub use padic::{PAdicNumber, UnitResidue, Valuation};
