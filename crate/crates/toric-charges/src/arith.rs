//! Exact arithmetic helpers: big rationals, rational linear algebra, and
//! Smith normal form over the integers.
//!
//! Everything combinatorial in this crate is boundary-sensitive (cone
//! membership, wall convexity, lattice congruences), so no floating point is
//! allowed anywhere in this module.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Z = BigInt;
pub type Q = BigRational;

/// Shorthand for an integer rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(Z::from(n))
}

/// Shorthand for the rational `n/d`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(Z::from(n), Z::from(d))
}

pub fn zi(n: i64) -> Z {
    Z::from(n)
}

// ---------------------------------------------------------------------------
// Rational linear algebra
// ---------------------------------------------------------------------------

/// Reduced row echelon form, processing columns in the order given by
/// `col_order` (a permutation of `0..ncols`). Returns the reduced rows
/// (zero rows dropped) and the pivot column of each.
///
/// The column order matters throughout the crate: it decides which variables
/// become pivots (eliminated) and which stay free (basis monomials), so every
/// caller passes an explicit order to keep bases deterministic.
pub fn rref_ordered(rows: &[Vec<Q>], col_order: &[usize]) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut next_row = 0usize;
    for &col in col_order {
        let Some(r) = (next_row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(next_row, r);
        let inv = m[next_row][col].clone();
        for x in m[next_row].iter_mut() {
            *x = &*x / &inv;
        }
        for r2 in 0..m.len() {
            if r2 != next_row && !m[r2][col].is_zero() {
                let f = m[r2][col].clone();
                let piv = m[next_row].clone();
                for (x, p) in m[r2].iter_mut().zip(piv.iter()) {
                    *x = &*x - &(&f * p);
                }
            }
        }
        pivots.push(col);
        next_row += 1;
        if next_row == m.len() {
            break;
        }
    }
    m.truncate(next_row);
    (m, pivots)
}

pub fn rref(rows: &[Vec<Q>]) -> (Vec<Vec<Q>>, Vec<usize>) {
    let ncols = rows.first().map_or(0, |r| r.len());
    let order: Vec<usize> = (0..ncols).collect();
    rref_ordered(rows, &order)
}

/// Solve `A x = b` exactly. Returns one solution (free variables set to 0),
/// or `None` if the system is inconsistent.
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let ncols = a.first().map_or(0, |r| r.len());
    let aug: Vec<Vec<Q>> = a
        .iter()
        .zip(b.iter())
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    // Include the augmented column last: a pivot there means inconsistency.
    let order: Vec<usize> = (0..=ncols).collect();
    let (rr, pivots) = rref_ordered(&aug, &order);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x = vec![Q::zero(); ncols];
    for (row, &p) in rr.iter().zip(pivots.iter()) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

/// Basis of the right kernel of `A` over the rationals.
pub fn kernel(a: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let ncols = a.first().map_or(0, |r| r.len());
    let (rr, pivots) = rref(a);
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![Q::zero(); ncols];
        v[free] = Q::one();
        for (row, &p) in rr.iter().zip(pivots.iter()) {
            v[p] = -row[free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Exact determinant of a square rational matrix.
pub fn det(a: &[Vec<Q>]) -> Q {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a.to_vec();
    let mut d = Q::one();
    for col in 0..n {
        let Some(r) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Q::zero();
        };
        if r != col {
            m.swap(col, r);
            d = -d;
        }
        d *= m[col][col].clone();
        let inv = m[col][col].clone();
        for r2 in col + 1..n {
            if m[r2][col].is_zero() {
                continue;
            }
            let f = &m[r2][col] / &inv;
            let piv = m[col].clone();
            for (x, p) in m[r2].iter_mut().zip(piv.iter()).skip(col) {
                *x = &*x - &(&f * p);
            }
        }
    }
    d
}

pub fn det_z(a: &[Vec<Z>]) -> Z {
    let aq: Vec<Vec<Q>> = a
        .iter()
        .map(|r| r.iter().map(|x| Q::from_integer(x.clone())).collect())
        .collect();
    let d = det(&aq);
    debug_assert!(d.is_integer());
    d.to_integer()
}

// ---------------------------------------------------------------------------
// Smith normal form
// ---------------------------------------------------------------------------

/// `u * a * v = s` with `u`, `v` unimodular and `s` diagonal with
/// `s[0] | s[1] | ...` (nonnegative diagonal, trailing zeros).
pub struct Snf {
    pub u: Vec<Vec<Z>>,
    pub s: Vec<Vec<Z>>,
    pub v: Vec<Vec<Z>>,
    /// Number of nonzero diagonal entries.
    pub rank: usize,
}

impl Snf {
    pub fn diag(&self, i: usize) -> &Z {
        &self.s[i][i]
    }
}

pub fn identity_z(n: usize) -> Vec<Vec<Z>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Z::one() } else { Z::zero() }).collect())
        .collect()
}

pub fn mat_mul_z(a: &[Vec<Z>], b: &[Vec<Z>]) -> Vec<Vec<Z>> {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![Z::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += &a[i][l] * &b[l][j];
            }
        }
    }
    out
}

pub fn mat_vec_z(a: &[Vec<Z>], x: &[Z]) -> Vec<Z> {
    a.iter()
        .map(|row| row.iter().zip(x.iter()).map(|(r, xi)| r * xi).sum())
        .collect()
}

pub fn smith_normal_form(a: &[Vec<Z>]) -> Snf {
    let nrows = a.len();
    let ncols = a.first().map_or(0, |r| r.len());
    let mut s: Vec<Vec<Z>> = a.to_vec();
    let mut u = identity_z(nrows);
    let mut v = identity_z(ncols);

    let mut t = 0usize; // current pivot position
    while t < nrows.min(ncols) {
        // Find a nonzero entry in the remaining block.
        let mut pivot = None;
        'search: for i in t..nrows {
            for j in t..ncols {
                if !s[i][j].is_zero() {
                    pivot = Some((i, j));
                    break 'search;
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        s.swap(t, pi);
        u.swap(t, pi);
        for row in s.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }

        // Eliminate row and column t by Euclidean steps until clean.
        loop {
            let mut changed = false;
            for i in t + 1..nrows {
                if s[i][t].is_zero() {
                    continue;
                }
                if s[t][t].is_zero() || !(&s[i][t] % &s[t][t]).is_zero() {
                    // Bring the smaller entry to the pivot.
                    if s[t][t].is_zero() || s[i][t].abs() < s[t][t].abs() {
                        s.swap(t, i);
                        u.swap(t, i);
                        changed = true;
                        continue;
                    }
                }
                let f = &s[i][t] / &s[t][t];
                let piv = s[t].clone();
                for (x, p) in s[i].iter_mut().zip(piv.iter()) {
                    *x = &*x - &(&f * p);
                }
                let upiv = u[t].clone();
                for (x, p) in u[i].iter_mut().zip(upiv.iter()) {
                    *x = &*x - &(&f * p);
                }
                changed = true;
            }
            for j in t + 1..ncols {
                if s[t][j].is_zero() {
                    continue;
                }
                if s[t][t].is_zero() || !(&s[t][j] % &s[t][t]).is_zero() {
                    if s[t][t].is_zero() || s[t][j].abs() < s[t][t].abs() {
                        for row in s.iter_mut() {
                            row.swap(t, j);
                        }
                        for row in v.iter_mut() {
                            row.swap(t, j);
                        }
                        changed = true;
                        continue;
                    }
                }
                let f = &s[t][j] / &s[t][t];
                for (i, row) in s.iter_mut().enumerate() {
                    let p = row[t].clone();
                    row[j] = &row[j] - &(&f * &p);
                    let _ = i;
                }
                for row in v.iter_mut() {
                    let p = row[t].clone();
                    row[j] = &row[j] - &(&f * &p);
                }
                changed = true;
            }
            if !changed {
                break;
            }
        }
        t += 1;
    }

    // Fix signs and enforce the divisibility chain.
    let r = (0..nrows.min(ncols)).take_while(|&i| !s[i][i].is_zero()).count();
    for i in 0..r {
        if s[i][i].is_negative() {
            for x in s[i].iter_mut() {
                *x = -x.clone();
            }
            for x in u[i].iter_mut() {
                *x = -x.clone();
            }
        }
    }
    let mut again = true;
    while again {
        again = false;
        for i in 0..r.saturating_sub(1) {
            if (&s[i + 1][i + 1] % &s[i][i]).is_zero() {
                continue;
            }
            // Standard trick: fold entry (i+1,i+1) into column i and redo the
            // 2x2 block with Euclidean steps.
            for row in v.iter_mut() {
                let p = row[i + 1].clone();
                row[i] = &row[i] + &p;
            }
            s[i + 1][i] = s[i + 1][i + 1].clone();
            // Clean the 2x2 block.
            while !s[i + 1][i].is_zero() {
                if s[i][i].is_zero() || s[i + 1][i].abs() < s[i][i].abs() {
                    s.swap(i, i + 1);
                    u.swap(i, i + 1);
                    continue;
                }
                let f = &s[i + 1][i] / &s[i][i];
                let piv = s[i].clone();
                for (x, p) in s[i + 1].iter_mut().zip(piv.iter()) {
                    *x = &*x - &(&f * p);
                }
                let upiv = u[i].clone();
                for (x, p) in u[i + 1].iter_mut().zip(upiv.iter()) {
                    *x = &*x - &(&f * p);
                }
            }
            // Clear the off-diagonal column entry this created.
            if !s[i][i + 1].is_zero() {
                let f = &s[i][i + 1] / &s[i][i];
                for row in s.iter_mut() {
                    let p = row[i].clone();
                    row[i + 1] = &row[i + 1] - &(&f * &p);
                }
                for row in v.iter_mut() {
                    let p = row[i].clone();
                    row[i + 1] = &row[i + 1] - &(&f * &p);
                }
            }
            if s[i][i].is_negative() {
                for x in s[i].iter_mut() {
                    *x = -x.clone();
                }
                for x in u[i].iter_mut() {
                    *x = -x.clone();
                }
            }
            if s[i + 1][i + 1].is_negative() {
                for x in s[i + 1].iter_mut() {
                    *x = -x.clone();
                }
                for x in u[i + 1].iter_mut() {
                    *x = -x.clone();
                }
            }
            again = true;
        }
    }

    Snf { u, s, v, rank: r }
}

/// Solve `A m = w` over the integers. Returns `(particular, kernel_basis)`,
/// or `None` if no integer solution exists.
pub fn solve_integer(a: &[Vec<Z>], w: &[Z]) -> Option<(Vec<Z>, Vec<Vec<Z>>)> {
    let ncols = a.first().map_or(0, |r| r.len());
    let snf = smith_normal_form(a);
    let uw = mat_vec_z(&snf.u, w);
    let mut y = vec![Z::zero(); ncols];
    for (i, uwi) in uw.iter().enumerate() {
        if i < snf.rank {
            if !(uwi % snf.diag(i)).is_zero() {
                return None;
            }
            y[i] = uwi / snf.diag(i);
        } else if !uwi.is_zero() {
            return None;
        }
    }
    let part = mat_vec_z(&snf.v, &y);
    let kernel: Vec<Vec<Z>> = (snf.rank..ncols)
        .map(|k| snf.v.iter().map(|row| row[k].clone()).collect())
        .collect();
    Some((part, kernel))
}

pub fn transpose_z(a: &[Vec<Z>]) -> Vec<Vec<Z>> {
    let nrows = a.len();
    let ncols = a.first().map_or(0, |r| r.len());
    (0..ncols)
        .map(|j| (0..nrows).map(|i| a[i][j].clone()).collect())
        .collect()
}
