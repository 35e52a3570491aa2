//! Largest prime factor decisions from sieve output.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::bigmath::{decimal, ln_biguint};
use crate::error::{Error, Result};
use crate::poly::IntPolynomial;
use crate::primes::factor_u128;
use crate::sieve::{CofactorClass, FactoredValue, SieveContext, SieveSettings};

/// What is known about `P^+(f(n))` after sieving to B.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlusRecord {
    pub n: u64,
    pub largest_sieved: Option<u64>,
    #[serde(with = "decimal")]
    pub cofactor: BigUint,
    pub cofactor_class: CofactorClass,
    /// Exact `P^+` when the cofactor is 1 or a certified prime. `|f(n)| = 1`
    /// has no prime factor and reports 1.
    #[serde(with = "opt_decimal")]
    pub p_plus: Option<BigUint>,
    #[serde(with = "decimal")]
    pub p_plus_lower: BigUint,
    #[serde(with = "decimal")]
    pub p_plus_upper: BigUint,
    /// `P^+(f(n)) > n`, exact when B >= n.
    pub exceeds_n: bool,
}

mod opt_decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_some(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Smallest integer `x` with `x^k >= c`.
fn ceil_root(c: &BigUint, k: u32) -> BigUint {
    let r = c.nth_root(k);
    if r.pow(k) < *c {
        r + 1u32
    } else {
        r
    }
}

impl PlusRecord {
    pub fn new(fv: &FactoredValue, bound: u64) -> Self {
        let largest_sieved = fv.largest_small_prime();
        let sieved = BigUint::from(largest_sieved.unwrap_or(1));
        let c = &fv.cofactor;
        let split = match fv.cofactor_class {
            CofactorClass::Composite => c
                .to_u128()
                .and_then(factor_u128)
                .and_then(|v| v.last().copied()),
            _ => None,
        };
        let (p_plus, lower, upper) = match fv.cofactor_class {
            CofactorClass::Unit => (Some(sieved.clone()), sieved.clone(), sieved),
            CofactorClass::Prime => (Some(c.clone()), c.clone(), c.clone()),
            CofactorClass::Composite if split.is_some() => {
                let top = BigUint::from(split.unwrap_or(1)).max(sieved);
                (Some(top.clone()), top.clone(), top)
            }
            CofactorClass::ProbablePrime | CofactorClass::Composite => {
                // every prime factor of c exceeds B, so c has at most
                // floor(ln c / ln(B+1)) of them counted with multiplicity
                let b1 = BigUint::from(bound) + 1u32;
                let omega = max_factor_count(c, &b1);
                let lower = ceil_root(c, omega).max(b1.clone());
                let upper = if fv.cofactor_class == CofactorClass::Composite {
                    c / &b1
                } else {
                    c.clone()
                };
                (None, lower.max(sieved.clone()), upper.max(sieved))
            }
        };
        let exceeds_n = !c.is_one() && bound >= fv.n
            || largest_sieved.is_some_and(|p| p > fv.n);
        PlusRecord {
            n: fv.n,
            largest_sieved,
            cofactor: c.clone(),
            cofactor_class: fv.cofactor_class,
            p_plus,
            p_plus_lower: lower,
            p_plus_upper: upper,
            exceeds_n,
        }
    }

    /// `P^+(f(n)) > delta n ln n`: `Some` when the bounds decide it.
    pub fn exceeds_threshold(&self, delta: f64) -> Option<bool> {
        let n = self.n as f64;
        let t = delta * n * n.ln();
        if big_f64(&self.p_plus_lower) > t {
            Some(true)
        } else if big_f64(&self.p_plus_upper) <= t {
            Some(false)
        } else {
            None
        }
    }
}

fn big_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Largest `k` with `b^k <= c`, at least 1.
fn max_factor_count(c: &BigUint, b: &BigUint) -> u32 {
    let est = (ln_biguint(c) / ln_biguint(b)).floor().max(1.0) as u32;
    let mut k = est.saturating_sub(1).max(1);
    while b.pow(k + 1) <= *c {
        k += 1;
    }
    while k > 1 && b.pow(k) > *c {
        k -= 1;
    }
    k
}

/// Per-n `P^+` records for `1..=N` with B = N.
pub fn largest_prime_factor_report(f: &IntPolynomial, n_max: u64) -> Result<Vec<PlusRecord>> {
    let ctx = SieveContext::new(f, SieveSettings::new(n_max))?;
    plus_records(&ctx, 1, n_max + 1)
}

/// Records for `[lo, hi)`; refuses a sieve bound below N.
pub fn plus_records(ctx: &SieveContext, lo: u64, hi: u64) -> Result<Vec<PlusRecord>> {
    let s = ctx.settings();
    if s.bound < s.n_max {
        return Err(Error::BoundBelowN {
            bound: s.bound,
            n_max: s.n_max,
        });
    }
    Ok(ctx
        .factor_segment(lo, hi)
        .iter()
        .map(|fv| PlusRecord::new(fv, s.bound))
        .collect())
}
