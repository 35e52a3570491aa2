//! Exact resultants and discriminants through Sylvester determinants.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::IntPolynomial;
use crate::error::{Error, Result};

/// Determinant by fraction-free (Bareiss) elimination. Every division is exact.
pub fn determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

fn sylvester(a: &[BigInt], b: &[BigInt]) -> Vec<Vec<BigInt>> {
    let da = a.len() - 1;
    let db = b.len() - 1;
    let size = da + db;
    let mut rows = Vec::with_capacity(size);
    // coefficients highest power first, shifted right one column per row
    for shift in 0..db {
        let mut row = vec![BigInt::zero(); size];
        for (j, c) in a.iter().rev().enumerate() {
            row[shift + j] = c.clone();
        }
        rows.push(row);
    }
    for shift in 0..da {
        let mut row = vec![BigInt::zero(); size];
        for (j, c) in b.iter().rev().enumerate() {
            row[shift + j] = c.clone();
        }
        rows.push(row);
    }
    rows
}

/// `Res(a, b)` for coefficient vectors (constant first, no trailing zeros).
pub fn resultant(a: &[BigInt], b: &[BigInt]) -> BigInt {
    if a.is_empty() || b.is_empty() {
        return BigInt::zero();
    }
    if a.len() == 1 && b.len() == 1 {
        return BigInt::one();
    }
    determinant(sylvester(a, b))
}

/// `disc f = (-1)^(d(d-1)/2) Res(f, f') / lc(f)`; zero iff f has a repeated
/// complex root.
pub fn discriminant(f: &IntPolynomial) -> Result<BigInt> {
    let d = f.degree();
    if d == 0 {
        return Err(Error::Degree {
            required: 1,
            found: 0,
        });
    }
    let res = resultant(f.coeffs(), &f.derivative());
    let disc = res / f.leading();
    Ok(if (d * (d - 1) / 2) % 2 == 1 { -disc } else { disc })
}
