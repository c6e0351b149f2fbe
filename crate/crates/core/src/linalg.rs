//! Exact linear algebra over the rationals: reduced row echelon form,
//! rank and null spaces. Small dense matrices only.

use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// Reduced row echelon form of `rows`, dropping zero rows.
/// Returns the nonzero rows together with their pivot columns
/// (strictly increasing). Pivot entries are normalised to 1.
pub fn rref(mut rows: Vec<Vec<Q>>, ncols: usize) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(sel) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, sel);
        let inv = rows[rank][col].recip();
        for x in rows[rank].iter_mut() {
            *x *= &inv;
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for c in 0..ncols {
                    let t = &rows[rank][c] * &f;
                    rows[r][c] -= t;
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    (rows, pivots)
}

pub fn rank(rows: Vec<Vec<Q>>, ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Reduces `v` against an RREF system, zeroing every pivot coordinate.
/// The result is the canonical representative of `v` modulo the row span.
pub fn reduce_against(v: &mut [Q], rref_rows: &[Vec<Q>], pivots: &[usize]) {
    for (row, &pc) in rref_rows.iter().zip(pivots) {
        if v[pc].is_zero() {
            continue;
        }
        let f = v[pc].clone();
        for c in 0..v.len() {
            let t = &row[c] * &f;
            v[c] -= t;
        }
    }
}

/// Basis of the right null space of `rows` (vectors x with A x = 0),
/// one basis vector per free column, in column order.
pub fn nullspace(rows: Vec<Vec<Q>>, ncols: usize) -> Vec<Vec<Q>> {
    let (rr, pivots) = rref(rows, ncols);
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![Q::zero(); ncols];
        v[free] = Q::one();
        for (row, &pc) in rr.iter().zip(&pivots) {
            v[pc] = -row[free].clone();
        }
        basis.push(v);
    }
    basis
}
