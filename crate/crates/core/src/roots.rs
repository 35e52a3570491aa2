//! Roots of f modulo p and their lifts to p^k.
//!
//! Simple roots (f'(r) != 0 mod p) lift by one Newton step per level. Roots
//! where f' vanishes lift by trying all p candidates `r + t p^(k-1)` and
//! keeping those with `f = 0 mod p^k`.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modp;
use crate::poly::{discriminant, IntPolynomial};
use crate::primes::{is_prime_u64, mul_mod_u64};

/// Below this, roots modulo p are found by evaluating every residue.
pub const BRUTE_FORCE_LIMIT: u64 = 1000;

pub const DEFAULT_ROOT_SEED: u64 = 0x005E_ED0F_2007;

pub const ROOT_CACHE_VERSION: u32 = 1;

/// Roots of f modulo p^k for `k = 1..=depth`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootTable {
    pub prime: u64,
    /// p divides disc f or the leading coefficient.
    pub singular: bool,
    /// `levels[k-1]` holds the sorted roots modulo p^k.
    pub levels: Vec<RootLevel>,
    /// Levels requested but not representable in 128-bit residues.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootLevel {
    pub k: u32,
    pub modulus: u128,
    pub roots: Vec<u128>,
}

impl RootTable {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// rho_f(p^k), or `None` beyond the lifted depth while roots remain.
    pub fn count(&self, k: u32) -> Option<usize> {
        assert!(k >= 1);
        match self.levels.get(k as usize - 1) {
            Some(level) => Some(level.roots.len()),
            None if self.levels.last().is_some_and(|l| l.roots.is_empty()) => Some(0),
            None => None,
        }
    }

    pub fn roots(&self, k: u32) -> &[u128] {
        self.levels
            .get(k as usize - 1)
            .map_or(&[], |l| l.roots.as_slice())
    }
}

/// Invariants of f shared by every per-prime computation.
#[derive(Clone, Debug)]
pub struct PolyContext {
    pub poly: IntPolynomial,
    pub derivative: Vec<BigInt>,
    pub disc: BigInt,
    /// d * disc^2, the ceiling on singular root counts.
    pub singular_bound: BigUint,
}

impl PolyContext {
    pub fn new(poly: &IntPolynomial) -> Result<Self> {
        let disc = discriminant(poly)?;
        let singular_bound = BigUint::from(poly.degree()) * disc.magnitude() * disc.magnitude();
        Ok(PolyContext {
            poly: poly.clone(),
            derivative: poly.derivative(),
            disc,
            singular_bound,
        })
    }

    pub fn is_singular(&self, p: u64) -> bool {
        (&self.disc % p).is_zero() || (self.poly.leading() % p).is_zero()
    }
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime_u64(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Sorted residues `r` in `[0, p)` with `f(r) = 0 mod p`.
pub fn roots_mod_p(f: &IntPolynomial, p: u64) -> Result<Vec<u64>> {
    roots_mod_p_seeded(f, p, DEFAULT_ROOT_SEED)
}

pub fn roots_mod_p_seeded(f: &IntPolynomial, p: u64, seed: u64) -> Result<Vec<u64>> {
    check_prime(p)?;
    let fp = modp::reduce(f, p);
    if fp.is_empty() {
        return Err(Error::VanishesModP(p));
    }
    if p < BRUTE_FORCE_LIMIT {
        return Ok((0..p).filter(|&r| modp::eval(&fp, r, p) == 0).collect());
    }
    let mut monic = fp;
    modp::make_monic(&mut monic, p);
    if monic.len() == 1 {
        return Ok(Vec::new());
    }
    let linear = modp::linear_part(&monic, p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut roots = Vec::with_capacity(linear.len().saturating_sub(1));
    modp::split_linear(&linear, p, &mut rng, &mut roots);
    roots.sort_unstable();
    Ok(roots)
}

/// rho_f(p) without extracting the roots: `deg gcd(f, x^p - x)`.
pub fn count_roots_mod_p(f: &IntPolynomial, p: u64) -> Result<usize> {
    check_prime(p)?;
    let fp = modp::reduce(f, p);
    if fp.is_empty() {
        return Err(Error::VanishesModP(p));
    }
    if p < BRUTE_FORCE_LIMIT {
        return Ok((0..p).filter(|&r| modp::eval(&fp, r, p) == 0).count());
    }
    if fp.len() == 1 {
        return Ok(0);
    }
    Ok(modp::linear_part(&fp, p).len() - 1)
}

/// Root table to depth `k_max`.
pub fn lift_roots(f: &IntPolynomial, p: u64, k_max: u32) -> Result<RootTable> {
    lift_roots_with(&PolyContext::new(f)?, p, k_max, DEFAULT_ROOT_SEED)
}

pub fn lift_roots_with(ctx: &PolyContext, p: u64, k_max: u32, seed: u64) -> Result<RootTable> {
    assert!(k_max >= 1, "k_max must be at least 1");
    let f = &ctx.poly;
    let level1: Vec<u128> = roots_mod_p_seeded(f, p, seed)?
        .into_iter()
        .map(u128::from)
        .collect();
    let mut table = RootTable {
        prime: p,
        singular: ctx.is_singular(p),
        levels: vec![RootLevel {
            k: 1,
            modulus: p as u128,
            roots: level1,
        }],
        truncated: false,
    };
    let big_p = BigInt::from(p);
    for k in 2..=k_max {
        let prev = table.levels.last().unwrap();
        if prev.roots.is_empty() {
            break;
        }
        let Some(modulus) = prev.modulus.checked_mul(p as u128) else {
            table.truncated = true;
            break;
        };
        let prev_mod = BigInt::from(prev.modulus);
        let new_mod = BigInt::from(modulus);
        let mut next = Vec::new();
        for &r in &prev.roots {
            let r_big = BigInt::from(r);
            let slope = eval_coeffs_mod(&ctx.derivative, &r_big, &big_p);
            if !slope.is_zero() {
                // f(r + t m) = f(r) + t m f'(r)  (mod m p)
                let fr = f.eval_mod(&r_big, &new_mod);
                let t0 = (fr / &prev_mod).mod_floor(&big_p).to_u64().unwrap();
                let inv = modp::inv(slope.to_u64().unwrap(), p);
                let t = (p - mul_mod_u64(t0, inv, p)) % p;
                next.push(r + t as u128 * prev.modulus);
            } else {
                for t in 0..p {
                    let cand = r + t as u128 * prev.modulus;
                    if f.eval_mod(&BigInt::from(cand), &new_mod).is_zero() {
                        next.push(cand);
                    }
                }
            }
        }
        next.sort_unstable();
        if !ctx.disc.is_zero() && BigUint::from(next.len()) > ctx.singular_bound {
            return Err(Error::RootBound {
                prime: p,
                level: k,
                count: next.len(),
                bound: ctx.singular_bound.to_string(),
            });
        }
        table.levels.push(RootLevel {
            k,
            modulus,
            roots: next,
        });
    }
    Ok(table)
}

fn eval_coeffs_mod(coeffs: &[BigInt], r: &BigInt, m: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in coeffs.iter().rev() {
        acc = (acc * r + c).mod_floor(m);
    }
    acc
}

/// Largest `k` with `p^k <= bound` (0 when `p > bound`).
pub fn max_level(p: u64, bound: &BigUint) -> u32 {
    let mut k = 0;
    let mut pk = BigUint::from(p);
    while &pk <= bound {
        k += 1;
        pk *= p;
    }
    k
}

/// rho_f(p^k) with per-(f, p) memoization. Each table is filled once; other
/// threads asking for the same prime wait on that fill.
pub struct RootCache {
    ctx: PolyContext,
    seed: u64,
    tables: Mutex<HashMap<u64, Arc<OnceLock<Result<RootTable>>>>>,
}

impl RootCache {
    pub fn new(f: &IntPolynomial) -> Result<Self> {
        Ok(RootCache {
            ctx: PolyContext::new(f)?,
            seed: DEFAULT_ROOT_SEED,
            tables: Mutex::new(HashMap::new()),
        })
    }

    pub fn rho(&self, p: u64, k: u32) -> Result<usize> {
        let slot = {
            let mut guard = self.tables.lock().unwrap();
            guard.entry(p).or_default().clone()
        };
        let table = slot.get_or_init(|| lift_roots_with(&self.ctx, p, k.max(8), self.seed));
        match table {
            Err(e) => Err(clone_error(e)),
            Ok(t) => match t.count(k) {
                Some(c) => Ok(c),
                // deeper than the memoized table
                None => rho_with(&self.ctx, p, k, self.seed),
            },
        }
    }
}

fn clone_error(e: &Error) -> Error {
    match e {
        Error::NotPrime(p) => Error::NotPrime(*p),
        Error::VanishesModP(p) => Error::VanishesModP(*p),
        other => Error::Config(other.to_string()),
    }
}

/// rho_f(p^k) for a single query.
pub fn rho(f: &IntPolynomial, p: u64, k: u32) -> Result<usize> {
    rho_with(&PolyContext::new(f)?, p, k, DEFAULT_ROOT_SEED)
}

fn rho_with(ctx: &PolyContext, p: u64, k: u32, seed: u64) -> Result<usize> {
    let table = lift_roots_with(ctx, p, k, seed)?;
    table.count(k).ok_or(Error::TruncatedTable {
        prime: p,
        depth: table.depth(),
        needed: k as usize,
    })
}

/// Root tables for every prime up to a bound, built in parallel.
pub fn build_tables(
    ctx: &PolyContext,
    primes: &[u64],
    depth_for: impl Fn(u64) -> u32 + Sync,
    seed: u64,
) -> Result<Vec<RootTable>> {
    primes
        .par_iter()
        .map(|&p| lift_roots_with(ctx, p, depth_for(p).max(1), seed))
        .collect()
}

/// On-disk root tables keyed by polynomial and prime bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootTableCache {
    pub version: u32,
    pub polynomial: IntPolynomial,
    pub prime_bound: u64,
    pub value_bound: String,
    pub seed: u64,
    pub tables: Vec<RootTable>,
}

impl RootTableCache {
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(file, self)?;
        Ok(())
    }

    /// Loads a cache if it exists and matches the key; `Ok(None)` otherwise.
    pub fn load_matching(
        path: &Path,
        polynomial: &IntPolynomial,
        prime_bound: u64,
        value_bound: &BigUint,
    ) -> Result<Option<Self>> {
        if !path.exists() {
            return Ok(None);
        }
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let cache: RootTableCache = serde_json::from_reader(file)?;
        let matches = cache.version == ROOT_CACHE_VERSION
            && &cache.polynomial == polynomial
            && cache.prime_bound == prime_bound
            && cache.value_bound == value_bound.to_string();
        Ok(matches.then_some(cache))
    }
}
