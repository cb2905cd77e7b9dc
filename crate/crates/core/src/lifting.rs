//! Lifting approximate solutions of a monomial system to exact ones.
//!
//! Given `y` and an approximate solution `x` whose residuals
//! `u_j = y_j / prod_i x_i^{a_ji}` lie in `1 + p^(2 ord_p(d) + e) Z_p` (with
//! `d` the absolute determinant of the chosen minor), the correction vector
//! `eps = (u^{B_0})^{1/d}` with `B_0 = sign(det A_0) adj(A_0)` has integer
//! exponents, lives in `1 + d p^e Z_p`, and multiplying the minor-column
//! coordinates by it yields an exact solution. Non-minor coordinates are
//! left untouched.

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::linalg;
use crate::monomial::{MinorChoice, MonomialError, MonomialMap};
use crate::padic::{self, PAdicError, PAdicNumber, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error("not an approximate solution: {0}")]
    NotAnApproximateSolution(String),
    #[error("inputs too shallow: lifting to {target} digits needs {needed} digits, have {available}")]
    PrecisionLoss {
        target: u32,
        needed: u32,
        available: u32,
    },
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("minor does not belong to this map")]
    ForeignMinor,
    #[error(transparent)]
    Monomial(#[from] MonomialError),
    #[error(transparent)]
    Padic(#[from] PAdicError),
}

pub type Result<T> = std::result::Result<T, LiftError>;

/// A lifting instance: the system, a chosen minor, the ideal exponent `e`,
/// the right-hand side `y`, an approximate solution, and the requested
/// output precision.
#[derive(Debug, Clone)]
pub struct LiftProblem {
    map: MonomialMap,
    minor: MinorChoice,
    ideal_exp: u32,
    target: Vec<PAdicNumber>,
    approx: Vec<PAdicNumber>,
    target_prec: u32,
}

impl LiftProblem {
    pub fn new(
        map: MonomialMap,
        minor: MinorChoice,
        ideal_exp: u32,
        target: Vec<PAdicNumber>,
        approx: Vec<PAdicNumber>,
        target_prec: u32,
    ) -> Result<Self> {
        if target.len() != map.rows() {
            return Err(LiftError::DimensionMismatch {
                expected: map.rows(),
                got: target.len(),
            });
        }
        if approx.len() != map.cols() {
            return Err(LiftError::DimensionMismatch {
                expected: map.cols(),
                got: approx.len(),
            });
        }
        assert!(ideal_exp >= 1, "ideal exponent must be at least 1");
        assert!(target_prec >= 1, "target precision must be at least 1");
        // The minor must actually come from this map.
        if minor.columns().len() != map.rows()
            || minor.columns().iter().any(|&c| c >= map.cols())
        {
            return Err(LiftError::ForeignMinor);
        }
        let det = linalg::det(&map.minor_matrix(&minor)).abs();
        if det.to_u64() != Some(minor.det_abs()) || minor.det_abs() == 0 {
            return Err(LiftError::ForeignMinor);
        }
        Ok(LiftProblem {
            map,
            minor,
            ideal_exp,
            target,
            approx,
            target_prec,
        })
    }

    pub fn map(&self) -> &MonomialMap {
        &self.map
    }

    pub fn minor(&self) -> &MinorChoice {
        &self.minor
    }

    pub fn working_modulus_exp(&self, p: u64) -> u32 {
        2 * padic::int_ord_u64(self.minor.det_abs(), p) as u32 + self.ideal_exp
    }
}

/// Lift the approximate solution to an exact one at the requested precision.
///
/// The output agrees with the input on non-minor columns; on minor columns
/// the ratio to the input lies in `1 + d p^e Z_p`.
pub fn lift_solution(problem: &LiftProblem) -> Result<Vec<PAdicNumber>> {
    let p = problem.target
        .first()
        .or(problem.approx.first())
        .expect("validated dimensions are positive")
        .prime();
    let d = problem.minor.det_abs();
    let a = padic::int_ord_u64(d, p) as u32;
    let m_exp = 2 * a + problem.ideal_exp;

    // Deep enough inputs: the d-th root costs `a` digits, and the residual
    // check needs the working modulus.
    let needed = (problem.target_prec + a).max(m_exp);
    let available = problem
        .target
        .iter()
        .chain(problem.approx.iter())
        .map(|x| x.effective_precision())
        .min()
        .expect("nonempty");
    if available < needed {
        return Err(LiftError::PrecisionLoss {
            target: problem.target_prec,
            needed,
            available,
        });
    }

    // Residuals u_j = y_j / prod_i x_i^{a_ji}; the problem invariant says
    // they are units congruent to 1 modulo p^(2 ord_p(d) + e).
    let image = problem.map.apply(&problem.approx)?;
    let mut residuals = Vec::with_capacity(image.len());
    for (j, (y, z)) in problem.target.iter().zip(&image).enumerate() {
        if y.is_exact_zero() {
            return Err(LiftError::NotAnApproximateSolution(format!(
                "target coordinate {} is zero",
                j + 1
            )));
        }
        let u = y.div(z)?;
        if u.ord() != Valuation::Finite(0) {
            return Err(LiftError::NotAnApproximateSolution(format!(
                "valuations disagree in coordinate {}: ord(y) = {}, ord(image) = {}",
                j + 1,
                y.ord(),
                z.ord()
            )));
        }
        if u.unit_mod(m_exp)? != BigUint::one() {
            return Err(LiftError::NotAnApproximateSolution(format!(
                "residual in coordinate {} is not 1 modulo {}^{}",
                j + 1,
                p,
                m_exp
            )));
        }
        residuals.push(u);
    }

    // B_0 = sign(det A_0) adj(A_0) has integer entries and B_0 A_0 = d I.
    let minor_matrix = problem.map.minor_matrix(&problem.minor);
    let b0 = linalg::scaled_inverse(&minor_matrix).expect("minor is invertible");

    let mut lifted = problem.approx.to_vec();
    for (j, row) in b0.iter().enumerate() {
        // w_j = prod_k u_k^{B_0[j][k]}, still in 1 + p^(2a+e) Z_p.
        let mut w = PAdicNumber::one(p, available)?;
        for (k, exp) in row.iter().enumerate() {
            if exp.is_zero() {
                continue;
            }
            let e = exp.to_i64().expect("adjugate entry fits i64");
            w = w.mul(&residuals[k].pow(e)?)?;
        }
        let eps = PAdicNumber::hensel_nth_root(&w, d, problem.target_prec)?;
        let col = problem.minor.columns()[j];
        lifted[col] = lifted[col].mul(&eps)?;
    }

    // The construction guarantees exactness; verify at the output precision.
    let check = problem.map.apply(&lifted)?;
    for (j, (y, z)) in problem.target.iter().zip(&check).enumerate() {
        let ok = y.ord() == z.ord()
            && y.unit_mod(problem.target_prec)? == z.unit_mod(problem.target_prec)?;
        assert!(
            ok,
            "lifted solution failed verification in coordinate {}",
            j + 1
        );
    }
    Ok(lifted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(n: i64, p: u64, prec: u32) -> PAdicNumber {
        PAdicNumber::from_integer(n, p, prec).unwrap()
    }

    #[test]
    fn square_root_of_17_via_lift() {
        // x^2 = 17 with approximation x = 1: 17 is 1 mod 8 = d^2 p Z_2.
        let map = MonomialMap::new(vec![vec![2]]).unwrap();
        let minor = map.select_minor(2);
        let problem = LiftProblem::new(
            map.clone(),
            minor,
            1,
            vec![exact(17, 2, 30)],
            vec![exact(1, 2, 30)],
            6,
        )
        .unwrap();
        let x = lift_solution(&problem).unwrap();
        assert_eq!(x[0].unit_mod(4).unwrap(), BigUint::from(9u32));
        let y = map.apply(&x).unwrap();
        assert_eq!(y[0].unit_mod(6).unwrap(), BigUint::from(17u32));
    }

    #[test]
    fn exact_input_is_unchanged() {
        let map = MonomialMap::new(vec![vec![1, 1], vec![0, 2]]).unwrap();
        let minor = map.select_minor(5);
        let x = vec![exact(3, 5, 30), exact(7, 5, 30)];
        let y = map.apply(&x).unwrap();
        let problem = LiftProblem::new(map, minor, 1, y, x.clone(), 10).unwrap();
        let lifted = lift_solution(&problem).unwrap();
        for (a, b) in x.iter().zip(&lifted) {
            assert!(a.agrees_to_precision(b, 10));
        }
    }

    #[test]
    fn perturbed_solution_is_recovered() {
        // Perturb a known solution by factors in 1 + d^2 p Z_2 (d = 2, e = 1).
        let map = MonomialMap::new(vec![vec![1, 1], vec![0, 2]]).unwrap();
        let minor = map.select_minor(2);
        assert_eq!(minor.det_abs(), 2);
        let x_true = vec![exact(3, 2, 40), exact(5, 2, 40)];
        let y = map.apply(&x_true).unwrap();
        let x_approx = vec![
            exact(3 * (1 + 8), 2, 40),
            exact(5 * (1 + 8), 2, 40),
        ];
        let problem = LiftProblem::new(map.clone(), minor, 1, y.clone(), x_approx.clone(), 20)
            .unwrap();
        let x = lift_solution(&problem).unwrap();
        let image = map.apply(&x).unwrap();
        for (got, want) in image.iter().zip(&y) {
            assert_eq!(got.ord(), want.ord());
            assert_eq!(got.unit_mod(20).unwrap(), want.unit_mod(20).unwrap());
        }
        // Corrections live on the minor columns in 1 + d p Z_2.
        for (i, (out, inp)) in x.iter().zip(&x_approx).enumerate() {
            let ratio = out.div(inp).unwrap();
            match ratio.sub(&PAdicNumber::one(2, 20).unwrap()) {
                Ok(diff) => {
                    if let Valuation::Finite(v) = diff.ord() {
                        assert!(v >= 2, "correction on column {i} escaped 1 + d p Z_2");
                    }
                }
                Err(PAdicError::PrecisionLoss) => {} // ratio is 1 to working precision
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
    }

    #[test]
    fn rejects_wrong_valuations() {
        let map = MonomialMap::new(vec![vec![2]]).unwrap();
        let minor = map.select_minor(5);
        let problem = LiftProblem::new(
            map,
            minor,
            1,
            vec![exact(5, 5, 20)],
            vec![exact(1, 5, 20)],
            5,
        )
        .unwrap();
        assert!(matches!(
            lift_solution(&problem),
            Err(LiftError::NotAnApproximateSolution(_))
        ));
    }

    #[test]
    fn rejects_shallow_residual() {
        // 2 is not 1 mod 5: not approximately solvable with x = 1.
        let map = MonomialMap::new(vec![vec![2]]).unwrap();
        let minor = map.select_minor(5);
        let problem = LiftProblem::new(
            map,
            minor,
            1,
            vec![exact(2, 5, 20)],
            vec![exact(1, 5, 20)],
            5,
        )
        .unwrap();
        assert!(matches!(
            lift_solution(&problem),
            Err(LiftError::NotAnApproximateSolution(_))
        ));
    }

    #[test]
    fn rejects_shallow_precision() {
        use num_bigint::BigUint;
        let map = MonomialMap::new(vec![vec![2]]).unwrap();
        let minor = map.select_minor(2);
        // y known to only 5 digits cannot be lifted to 20.
        let y = PAdicNumber::from_unit_class(2, 0, BigUint::from(17u32), 5).unwrap();
        let problem = LiftProblem::new(
            map,
            minor,
            1,
            vec![y],
            vec![exact(1, 2, 30)],
            20,
        )
        .unwrap();
        assert!(matches!(
            lift_solution(&problem),
            Err(LiftError::PrecisionLoss { .. })
        ));
    }

    #[test]
    fn rejects_foreign_minor() {
        let map_a = MonomialMap::new(vec![vec![2]]).unwrap();
        let map_b = MonomialMap::new(vec![vec![3]]).unwrap();
        let minor_b = map_b.select_minor(5);
        assert!(matches!(
            LiftProblem::new(
                map_a,
                minor_b,
                1,
                vec![exact(4, 5, 20)],
                vec![exact(1, 5, 20)],
                5,
            ),
            Err(LiftError::ForeignMinor)
        ));
    }
}
