//! Exact integer linear algebra: rank, determinant, adjugate.
//!
//! Fraction-free Gaussian elimination (Bareiss) keeps everything in `BigInt`;
//! matrices here are small, so cofactor expansion for the adjugate is fine.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Rank over the rationals, computed by fraction-free elimination on a copy.
pub fn rank(matrix: &[Vec<BigInt>]) -> usize {
    let rows = matrix.len();
    if rows == 0 {
        return 0;
    }
    let cols = matrix[0].len();
    let mut a: Vec<Vec<BigInt>> = matrix.to_vec();
    let mut rank = 0;
    let mut prev_pivot = BigInt::one();
    for col in 0..cols {
        let Some(pivot_row) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot_row);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let num = &a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c];
                a[r][c] = num / &prev_pivot;
            }
            a[r][col] = BigInt::zero();
        }
        prev_pivot = a[rank][col].clone();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Determinant of a square matrix by the Bareiss algorithm.
pub fn det(matrix: &[Vec<BigInt>]) -> BigInt {
    let n = matrix.len();
    if n == 0 {
        return BigInt::one();
    }
    debug_assert!(matrix.iter().all(|row| row.len() == n));
    let mut a: Vec<Vec<BigInt>> = matrix.to_vec();
    let mut sign = BigInt::one();
    let mut prev_pivot = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, swap);
            sign = -sign;
        }
        for r in k + 1..n {
            for c in k + 1..n {
                let num = &a[k][k] * &a[r][c] - &a[r][k] * &a[k][c];
                a[r][c] = num / &prev_pivot;
            }
            a[r][k] = BigInt::zero();
        }
        prev_pivot = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Adjugate: `adj(A) * A = det(A) * I`. Entry `(i, j)` is the `(j, i)` cofactor.
pub fn adjugate(matrix: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = matrix.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![vec![BigInt::one()]];
    }
    let minor_det = |skip_row: usize, skip_col: usize| -> BigInt {
        let sub: Vec<Vec<BigInt>> = (0..n)
            .filter(|&r| r != skip_row)
            .map(|r| {
                (0..n)
                    .filter(|&c| c != skip_col)
                    .map(|c| matrix[r][c].clone())
                    .collect()
            })
            .collect();
        det(&sub)
    };
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let cof = minor_det(j, i);
                    if (i + j) % 2 == 0 {
                        cof
                    } else {
                        -cof
                    }
                })
                .collect()
        })
        .collect()
}

/// `sign(det A) * adj(A)`, the integer matrix `B` with `B * A = |det A| * I`.
pub fn scaled_inverse(matrix: &[Vec<BigInt>]) -> Option<Vec<Vec<BigInt>>> {
    let d = det(matrix);
    if d.is_zero() {
        return None;
    }
    let mut adj = adjugate(matrix);
    if d.is_negative() {
        for row in &mut adj {
            for entry in row {
                *entry = -std::mem::take(entry);
            }
        }
    }
    Some(adj)
}
