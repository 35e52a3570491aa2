//! Prime generation and primality certification.
//!
//! Cofactors left over by the sieve are classified with Miller-Rabin. Below
//! 3.317e24 the first thirteen prime bases form a deterministic certificate
//! (Sorenson and Webster); above that bound the test runs with 40 seeded
//! random bases and the verdict is labelled probable.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// First thirteen primes; a deterministic witness set for n < 3.317e24.
const CERTIFICATE_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// 3317044064679887385961981, the least strong pseudoprime to all thirteen bases.
const CERTIFICATE_LIMIT: u128 = 3_317_044_064_679_887_385_961_981;

const RANDOM_ROUNDS: usize = 40;

/// All primes `p <= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::with_capacity(limit / 8 + 8);
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        if let Some(start) = i.checked_mul(i) {
            let mut j = start;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Smallest-prime-factor table for `0..=limit` (entries 0 and 1 are 0).
pub fn smallest_prime_factors(limit: u64) -> Vec<u32> {
    let limit = limit as usize;
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] != 0 {
            continue;
        }
        let mut j = i;
        while j <= limit {
            if spf[j] == 0 {
                spf[j] = i as u32;
            }
            j += i;
        }
    }
    spf
}

#[inline]
pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

fn strong_probable_prime_u64(n: u64, base: u64) -> bool {
    let base = base % n;
    if base == 0 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let mut x = pow_mod_u64(base, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod_u64(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic primality for every `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &CERTIFICATE_BASES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    CERTIFICATE_BASES[..12]
        .iter()
        .all(|&a| strong_probable_prime_u64(n, a))
}

fn strong_probable_prime_big(n: &BigUint, base: &BigUint) -> bool {
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    let mut x = base.modpow(&d, n);
    if x.is_one() || x == n_minus_one {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_one {
            return true;
        }
    }
    false
}

/// Primality verdict for a sieve cofactor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primality {
    Prime,
    ProbablePrime,
    Composite,
}

/// Classifies `n >= 2`. `seed` only matters above the certificate limit.
pub fn classify(n: &BigUint, seed: u64) -> Primality {
    if let Some(small) = n.to_u64() {
        return if is_prime_u64(small) {
            Primality::Prime
        } else {
            Primality::Composite
        };
    }
    for &p in &CERTIFICATE_BASES {
        if (n % p).is_zero() {
            return Primality::Composite;
        }
    }
    let certified = n.to_u128().is_some_and(|v| v < CERTIFICATE_LIMIT);
    if certified {
        let all = CERTIFICATE_BASES
            .iter()
            .all(|&a| strong_probable_prime_big(n, &BigUint::from(a)));
        return if all {
            Primality::Prime
        } else {
            Primality::Composite
        };
    }
    let low = (n & BigUint::from(u64::MAX)).to_u64().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ low.rotate_left(17));
    let upper = n - 2u32;
    for _ in 0..RANDOM_ROUNDS {
        let a = loop {
            let bits = n.bits();
            let candidate = random_below(&mut rng, bits) % &upper;
            if candidate >= BigUint::from(2u32) {
                break candidate;
            }
        };
        if !strong_probable_prime_big(n, &a) {
            return Primality::Composite;
        }
    }
    Primality::ProbablePrime
}

fn random_below(rng: &mut ChaCha8Rng, bits: u64) -> BigUint {
    let words = bits.div_ceil(32) as usize;
    let digits: Vec<u32> = (0..words).map(|_| rng.gen()).collect();
    BigUint::new(digits)
}

fn mul_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a * b) % m;
    }
    // m < 2^82, so 45-bit chunks keep every product below 2^128
    const CHUNK: u32 = 45;
    const MASK: u128 = (1 << CHUNK) - 1;
    let mut r = 0u128;
    for shift in [CHUNK, 0] {
        r = (r << CHUNK) % m;
        r = (r + a * ((b >> shift) & MASK) % m) % m;
    }
    r
}

fn is_prime_u128(n: u128) -> bool {
    match u64::try_from(n) {
        Ok(small) => is_prime_u64(small),
        Err(_) => classify(&BigUint::from(n), 0) == Primality::Prime,
    }
}

/// Nontrivial divisor of composite odd `n` by Brent's cycle search.
fn rho_divisor(n: u128) -> Option<u128> {
    const BATCH: u64 = 128;
    const BUDGET: u64 = 1 << 22;
    for c in 1..16u128 {
        let step = |x: u128| (mul_mod_u128(x, x, n) + c) % n;
        let (mut y, mut q, mut g) = (2u128, 1u128, 1u128);
        let (mut x, mut ys) = (y, y);
        let mut r = 1u64;
        let mut spent = 0u64;
        while g == 1 && spent < BUDGET {
            x = y;
            for _ in 0..r {
                y = step(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = step(y);
                    q = mul_mod_u128(q, x.abs_diff(y), n);
                }
                g = crate::bigmath::gcd_u128(q, n);
                k += BATCH;
            }
            spent += 2 * r;
            r *= 2;
        }
        if g == n {
            loop {
                ys = step(ys);
                g = crate::bigmath::gcd_u128(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g > 1 && g < n {
            return Some(g);
        }
    }
    None
}

/// Certified prime factorization of `n` below the deterministic
/// certificate limit, or `None` when rho runs out of budget.
pub fn factor_u128(n: u128) -> Option<Vec<u128>> {
    if n >= CERTIFICATE_LIMIT {
        return None;
    }
    let mut out = Vec::new();
    let mut stack = vec![n];
    while let Some(mut m) = stack.pop() {
        while m % 2 == 0 {
            out.push(2);
            m /= 2;
        }
        if m == 1 {
            continue;
        }
        if is_prime_u128(m) {
            out.push(m);
            continue;
        }
        let d = rho_divisor(m)?;
        stack.push(d);
        stack.push(m / d);
    }
    out.sort_unstable();
    Some(out)
}
