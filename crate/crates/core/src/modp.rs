//! Dense polynomials over the field with p elements, for `p < 2^63`.
//!
//! Only what root extraction and the irreducibility screen need: reduction,
//! division, gcd, modular powering, and splitting of a product of distinct
//! linear factors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;

use crate::poly::IntPolynomial;
use crate::primes::{mul_mod_u64, pow_mod_u64};

/// Coefficients low-first with no trailing zeros; the zero polynomial is empty.
pub(crate) type Fpx = Vec<u64>;

fn trim(a: &mut Fpx) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub(crate) fn reduce(f: &IntPolynomial, p: u64) -> Fpx {
    let modulus = BigInt::from(p);
    let mut out: Fpx = f
        .coeffs()
        .iter()
        .map(|c| c.mod_floor(&modulus).to_u64().unwrap())
        .collect();
    trim(&mut out);
    out
}

pub(crate) fn inv(a: u64, p: u64) -> u64 {
    pow_mod_u64(a, p - 2, p)
}

pub(crate) fn eval(a: &[u64], x: u64, p: u64) -> u64 {
    a.iter()
        .rev()
        .fold(0, |acc, &c| (mul_mod_u64(acc, x, p) + c) % p)
}

fn degree(a: &[u64]) -> Option<usize> {
    a.len().checked_sub(1)
}

pub(crate) fn make_monic(a: &mut Fpx, p: u64) {
    if let Some(&lc) = a.last() {
        let l = inv(lc, p);
        for c in a.iter_mut() {
            *c = mul_mod_u64(*c, l, p);
        }
    }
}

fn sub(a: &[u64], b: &[u64], p: u64) -> Fpx {
    let n = a.len().max(b.len());
    let mut out: Fpx = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut out);
    out
}

fn mul(a: &[u64], b: &[u64], p: u64) -> Fpx {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod_u64(x, y, p)) % p;
        }
    }
    trim(&mut out);
    out
}

/// Quotient and remainder; `b` must be nonzero.
pub(crate) fn divrem(a: &[u64], b: &[u64], p: u64) -> (Fpx, Fpx) {
    let db = degree(b).expect("division by the zero polynomial");
    let mut r = a.to_vec();
    trim(&mut r);
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let lead_inv = inv(b[db], p);
    let mut q = vec![0u64; r.len() - db];
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let factor = mul_mod_u64(*r.last().unwrap(), lead_inv, p);
        q[shift] = factor;
        for (j, &c) in b.iter().enumerate() {
            let t = mul_mod_u64(factor, c, p);
            r[shift + j] = (r[shift + j] + p - t) % p;
        }
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

fn rem(a: &[u64], b: &[u64], p: u64) -> Fpx {
    divrem(a, b, p).1
}

/// Monic gcd.
pub(crate) fn gcd(a: &[u64], b: &[u64], p: u64) -> Fpx {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    make_monic(&mut x, p);
    x
}

/// `base^exp mod m`.
pub(crate) fn powmod(base: &[u64], mut exp: u64, m: &[u64], p: u64) -> Fpx {
    let mut acc: Fpx = rem(&[1], m, p);
    let mut b = rem(base, m, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = rem(&mul(&acc, &b, p), m, p);
        }
        exp >>= 1;
        if exp > 0 {
            b = rem(&mul(&b, &b, p), m, p);
        }
    }
    acc
}

/// `gcd(f, x^p - x)`, the product of the distinct linear factors of `f`.
pub(crate) fn linear_part(f: &[u64], p: u64) -> Fpx {
    let xp = powmod(&[0, 1], p, f, p);
    gcd(f, &sub(&xp, &[0, 1], p), p)
}

/// Roots of a monic product of distinct linear factors, by equal-degree
/// splitting with random shifts. Needs odd `p`.
pub(crate) fn split_linear<R: Rng>(g: &[u64], p: u64, rng: &mut R, out: &mut Vec<u64>) {
    match degree(g) {
        None | Some(0) => {}
        Some(1) => out.push((p - mul_mod_u64(g[0], inv(g[1], p), p)) % p),
        Some(d) => loop {
            let a = rng.gen_range(0..p);
            let h = powmod(&[a, 1], (p - 1) / 2, g, p);
            let h1 = sub(&h, &[1], p);
            let factor = gcd(g, &h1, p);
            let k = degree(&factor).unwrap_or(0);
            if k > 0 && k < d {
                let (cofactor, _) = divrem(g, &factor, p);
                split_linear(&factor, p, rng, out);
                split_linear(&cofactor, p, rng, out);
                return;
            }
        },
    }
}

/// Irreducibility of a polynomial of degree `d >= 1` over the field:
/// `gcd(f, x^(p^i) - x) = 1` for every `i <= d/2`.
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let d = match degree(f) {
        None | Some(0) => return false,
        Some(d) => d,
    };
    let mut monic = f.to_vec();
    make_monic(&mut monic, p);
    let mut h: Fpx = vec![0, 1];
    for _ in 0..d / 2 {
        h = powmod(&h, p, &monic, p);
        let g = gcd(&monic, &sub(&h, &[0, 1], p), p);
        if degree(&g).unwrap_or(0) > 0 {
            return false;
        }
    }
    true
}
