//! Small dense linear algebra over prime fields, for Jacobians and Gram
//! matrices. Entries are reduced residues; `p` fits in u64 and products go
//! through u128.

use crate::arith::{mul_mod_u64, pow_mod_u64};

pub(crate) fn inv_mod_p(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod_u64(a % p, p - 2, p)
}

/// Row-reduce in place; returns the rank and the pivot column of each of
/// the first `rank` rows.
pub(crate) fn row_reduce(mat: &mut [Vec<u64>], p: u64) -> (usize, Vec<usize>) {
    let limit = mat.first().map_or(0, Vec::len);
    row_reduce_within(mat, p, limit)
}

/// Row-reduce, choosing pivots only among the first `col_limit` columns
/// (rows are still reduced across their full width).
#[allow(clippy::needless_range_loop)]
pub(crate) fn row_reduce_within(
    mat: &mut [Vec<u64>],
    p: u64,
    col_limit: usize,
) -> (usize, Vec<usize>) {
    let rows = mat.len();
    if rows == 0 {
        return (0, Vec::new());
    }
    let cols = mat[0].len();
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    for col in 0..col_limit.min(cols) {
        if rank == rows {
            break;
        }
        let Some(pivot_row) = (rank..rows).find(|&r| !mat[r][col].is_multiple_of(p)) else {
            continue;
        };
        mat.swap(rank, pivot_row);
        let inv = inv_mod_p(mat[rank][col], p);
        for c in col..cols {
            mat[rank][c] = mul_mod_u64(mat[rank][c] % p, inv, p);
        }
        for r in 0..rows {
            if r != rank && !mat[r][col].is_multiple_of(p) {
                let factor = mat[r][col] % p;
                for c in col..cols {
                    let sub = mul_mod_u64(factor, mat[rank][c], p);
                    mat[r][c] = (mat[r][c] % p + p - sub) % p;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    (rank, pivots)
}

pub(crate) fn rank_mod(mat: &[Vec<u64>], p: u64) -> usize {
    let mut work: Vec<Vec<u64>> = mat
        .iter()
        .map(|row| row.iter().map(|&v| v % p).collect())
        .collect();
    row_reduce(&mut work, p).0
}

/// Inverse of a square matrix mod p, or `None` if singular.
pub(crate) fn invert_mod(mat: &[Vec<u64>], p: u64) -> Option<Vec<Vec<u64>>> {
    let n = mat.len();
    let mut aug: Vec<Vec<u64>> = mat
        .iter()
        .enumerate()
        .map(|(i, row)| {
            debug_assert_eq!(row.len(), n);
            let mut r: Vec<u64> = row.iter().map(|&v| v % p).collect();
            r.extend((0..n).map(|j| u64::from(i == j)));
            r
        })
        .collect();
    let (rank, _) = row_reduce_within(&mut aug, p, n);
    if rank < n {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// `M * v mod p` for a square matrix.
pub(crate) fn mat_vec(mat: &[Vec<u64>], v: &[u64], p: u64) -> Vec<u64> {
    mat.iter()
        .map(|row| {
            row.iter().zip(v).fold(0u64, |acc, (&a, &b)| {
                (acc + mul_mod_u64(a % p, b % p, p)) % p
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_singular_and_full_matrices() {
        let full = vec![vec![1, 2], vec![3, 4]];
        assert_eq!(rank_mod(&full, 5), 2);
        let singular = vec![vec![1, 2], vec![2, 4]];
        assert_eq!(rank_mod(&singular, 5), 1);
        assert_eq!(rank_mod(&[vec![0, 0], vec![0, 0]], 3), 0);
    }

    #[test]
    fn inverse_round_trips() {
        let m = vec![vec![2, 1], vec![1, 3]];
        let p = 101;
        let inv = invert_mod(&m, p).unwrap();
        for i in 0..2 {
            let e_i: Vec<u64> = (0..2).map(|j| u64::from(i == j)).collect();
            let col = mat_vec(&m, &mat_vec(&inv, &e_i, p), p);
            assert_eq!(col, e_i);
        }
        assert!(invert_mod(&[vec![1, 2], vec![2, 4]], 7).is_none());
    }

    #[test]
    fn pivots_are_leftmost() {
        let mut m = vec![vec![0, 1, 2], vec![0, 2, 5]];
        let (rank, pivots) = row_reduce(&mut m, 7);
        assert_eq!(rank, 2);
        assert_eq!(pivots, vec![1, 2]);
    }
}
