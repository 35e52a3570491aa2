//! `alpha_p(N) = sum_{n <= N} v_p(f(n))` by counting residues, without
//! sieving.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{first_integer_zero, IntPolynomial};
use crate::primes::{is_prime_u64, primes_up_to};
use crate::roots::{lift_roots_with, max_level, PolyContext, RootTable, DEFAULT_ROOT_SEED};

/// Number of `1 <= n <= N` with `n = r (mod m)`, for `0 <= r < m`.
pub fn progression_count(r: u128, m: u128, n_max: u64) -> u64 {
    let n = n_max as u128;
    let c = if r == 0 {
        n / m
    } else if r > n {
        0
    } else {
        (n - r) / m + 1
    };
    c as u64
}

/// Root table of `f / p^e` and `e = v_p(content f)`, deep enough that
/// every `v_p(f(n))` with `n <= n_max` is visible.
pub(crate) fn table_for(
    f: &IntPolynomial,
    ctx: &PolyContext,
    p: u64,
    n_max: u64,
    seed: u64,
) -> Result<(u32, RootTable)> {
    let content = f.content();
    let mut e = 0;
    let mut pe = BigUint::from(1u32);
    while (&content % (&pe * p)).is_zero() {
        pe *= p;
        e += 1;
    }
    let bound = f.value_bound(n_max) / &pe;
    let depth = max_level(p, &bound).max(1);
    let table = if e == 0 {
        lift_roots_with(ctx, p, depth, seed)?
    } else {
        let reduced = f.divide_exact(&BigInt::from(pe));
        lift_roots_with(&PolyContext::new(&reduced)?, p, depth, seed)?
    };
    Ok((e, table))
}

/// `alpha_p(N)` from a complete root table.
pub fn alpha_from_table(content_exp: u32, table: &RootTable, n_max: u64) -> Result<u64> {
    if table.truncated {
        return Err(Error::TruncatedTable {
            prime: table.prime,
            depth: table.depth(),
            needed: table.depth() + 1,
        });
    }
    let mut total = content_exp as u64 * n_max;
    for level in &table.levels {
        for &r in &level.roots {
            total += progression_count(r, level.modulus, n_max);
        }
    }
    Ok(total)
}

fn check(f: &IntPolynomial, n_max: u64) -> Result<()> {
    f.require_degree(1)?;
    match first_integer_zero(f, n_max) {
        Some(n) => Err(Error::IntegerZero(n)),
        None => Ok(()),
    }
}

pub fn alpha_for_prime(f: &IntPolynomial, p: u64, n_max: u64) -> Result<u64> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    check(f, n_max)?;
    let ctx = PolyContext::new(f)?;
    let (e, table) = table_for(f, &ctx, p, n_max, DEFAULT_ROOT_SEED)?;
    alpha_from_table(e, &table, n_max)
}

/// `alpha_p(N)` for every prime `p <= N` (zero entries included).
pub fn alpha_exponents(f: &IntPolynomial, n_max: u64) -> Result<BTreeMap<u64, u64>> {
    check(f, n_max)?;
    let ctx = PolyContext::new(f)?;
    let primes = primes_up_to(n_max);
    let values: Vec<u64> = primes
        .par_iter()
        .map(|&p| {
            let (e, table) = table_for(f, &ctx, p, n_max, DEFAULT_ROOT_SEED)?;
            alpha_from_table(e, &table, n_max)
        })
        .collect::<Result<_>>()?;
    Ok(primes.into_iter().zip(values).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimeKind {
    /// `p` divides neither the discriminant nor the content.
    Regular,
    /// `p | disc f`.
    Singular,
    /// `p` divides every coefficient.
    Content,
}

/// One prime's `alpha_p(N)` against the main term `N rho(p) / (p - 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaResidual {
    pub prime: u64,
    pub kind: PrimeKind,
    pub alpha: u64,
    pub rho: usize,
    pub main_term: f64,
    pub residual: f64,
    /// `C d ln N / ln p` for regular primes, `2 d disc^2 N / p` otherwise.
    pub bound: f64,
    pub pass: bool,
}

impl AlphaResidual {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        prime: u64,
        kind: PrimeKind,
        alpha: u64,
        rho: usize,
        degree: usize,
        disc: &BigInt,
        n_max: u64,
        constant: f64,
    ) -> Self {
        let main_term = n_max as f64 * rho as f64 / (prime - 1) as f64;
        let residual = alpha as f64 - main_term;
        let (bound, pass) = match kind {
            PrimeKind::Regular => {
                let b = constant * degree as f64 * (n_max as f64).ln() / (prime as f64).ln();
                (b, residual.abs() <= b)
            }
            PrimeKind::Singular => {
                // exact: alpha * p <= 2 d disc^2 N
                let rhs = BigUint::from(2 * degree) * disc.magnitude() * disc.magnitude()
                    * n_max;
                let lhs = BigUint::from(alpha) * prime;
                let b = rhs.to_f64().unwrap_or(f64::INFINITY) / prime as f64;
                (b, lhs <= rhs)
            }
            PrimeKind::Content => (f64::INFINITY, true),
        };
        AlphaResidual {
            prime,
            kind,
            alpha,
            rho,
            main_term,
            residual,
            bound,
            pass,
        }
    }
}

/// Residual of every prime `p <= N` with `alpha` taken from `alpha`.
pub fn alpha_residuals(
    f: &IntPolynomial,
    n_max: u64,
    alpha: &BTreeMap<u64, u64>,
    constant: f64,
) -> Result<Vec<AlphaResidual>> {
    let ctx = PolyContext::new(f)?;
    let content = f.content();
    primes_up_to(n_max)
        .par_iter()
        .map(|&p| {
            let kind = if (&content % p).is_zero() {
                PrimeKind::Content
            } else if (&ctx.disc % p).is_zero() {
                PrimeKind::Singular
            } else {
                PrimeKind::Regular
            };
            let rho = if kind == PrimeKind::Content {
                p as usize
            } else {
                crate::roots::count_roots_mod_p(f, p)?
            };
            let a = alpha.get(&p).copied().unwrap_or(0);
            Ok(AlphaResidual::new(
                p,
                kind,
                a,
                rho,
                f.degree(),
                &ctx.disc,
                n_max,
                constant,
            ))
        })
        .collect()
}
