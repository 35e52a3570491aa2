//! Segmented sieve factoring `|f(n)|` for `1 <= n <= N` over the primes up
//! to a bound B.
//!
//! For each prime the sieve walks the progressions `n = r (mod p^k)` given by
//! the root table, so `v_p(f(n))` is the number of levels whose progression
//! contains `n`. Whatever survives division by the marked prime powers is
//! the cofactor, and all of its prime factors exceed B.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bigmath::{decimal, ln_biguint};
use crate::coprime::{settle, CoprimeBase};
use crate::error::{Error, Result};
use crate::poly::IntPolynomial;
use crate::poly::first_integer_zero;
use crate::primes::{classify, primes_up_to, Primality};
use crate::roots::{lift_roots_with, max_level, PolyContext, RootTable, DEFAULT_ROOT_SEED};

pub const DEFAULT_SEGMENT_SIZE: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CofactorClass {
    Unit,
    Prime,
    ProbablePrime,
    #[serde(rename = "composite_unknown")]
    Composite,
}

/// Factorization of `|f(n)|` over the primes up to B, plus the cofactor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredValue {
    pub n: u64,
    /// `(prime, exponent)` pairs, ascending by prime.
    pub small_factors: Vec<(u64, u32)>,
    #[serde(with = "decimal")]
    pub cofactor: BigUint,
    pub cofactor_class: CofactorClass,
}

impl FactoredValue {
    pub fn largest_small_prime(&self) -> Option<u64> {
        self.small_factors.last().map(|&(p, _)| p)
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.small_factors
            .binary_search_by_key(&p, |&(q, _)| q)
            .map_or(0, |i| self.small_factors[i].1)
    }

    /// `|f(n)|` rebuilt from the factorization.
    pub fn value(&self) -> BigUint {
        self.small_factors
            .iter()
            .fold(self.cofactor.clone(), |acc, &(p, e)| acc * BigUint::from(p).pow(e))
    }

    pub fn ln_value(&self) -> f64 {
        self.small_factors
            .iter()
            .map(|&(p, e)| e as f64 * (p as f64).ln())
            .sum::<f64>()
            + ln_biguint(&self.cofactor)
    }
}

/// Per-prime maximal exponents and exponent sums over a range of n, plus the
/// distinct cofactors.
///
/// Cofactors are stored as sets and only combined into their lcm on demand
/// (see [`crate::coprime::settle`]), so merging two maps is a plain union.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentMap {
    /// `max_n v_p(f(n))` for sieved primes that occur.
    pub max_exponents: BTreeMap<u64, u32>,
    /// `alpha_p = sum_n v_p(f(n))`.
    pub alpha: BTreeMap<u64, u64>,
    #[serde(with = "decimal_set")]
    pub prime_cofactors: BTreeSet<BigUint>,
    #[serde(with = "decimal_set")]
    pub composite_cofactors: BTreeSet<BigUint>,
}

mod decimal_set {
    use std::collections::BTreeSet;

    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &BTreeSet<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeSet<BigUint>, D::Error> {
        Vec::<String>::deserialize(d)?
            .into_iter()
            .map(|x| x.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

impl ExponentMap {
    pub fn absorb(&mut self, fv: &FactoredValue) {
        for &(p, e) in &fv.small_factors {
            let m = self.max_exponents.entry(p).or_insert(0);
            *m = (*m).max(e);
            *self.alpha.entry(p).or_insert(0) += e as u64;
        }
        match fv.cofactor_class {
            CofactorClass::Unit => {}
            CofactorClass::Prime | CofactorClass::ProbablePrime => {
                self.prime_cofactors.insert(fv.cofactor.clone());
            }
            CofactorClass::Composite => {
                self.composite_cofactors.insert(fv.cofactor.clone());
            }
        }
    }

    pub fn merge(&mut self, other: &ExponentMap) {
        for (&p, &e) in &other.max_exponents {
            let m = self.max_exponents.entry(p).or_insert(0);
            *m = (*m).max(e);
        }
        for (&p, &a) in &other.alpha {
            *self.alpha.entry(p).or_insert(0) += a;
        }
        self.prime_cofactors
            .extend(other.prime_cofactors.iter().cloned());
        self.composite_cofactors
            .extend(other.composite_cofactors.iter().cloned());
    }

    /// Pairwise-coprime factorization of the cofactor lcm.
    pub fn cofactor_base(&self) -> CoprimeBase {
        let composites: Vec<BigUint> = self.composite_cofactors.iter().cloned().collect();
        settle(self.prime_cofactors.iter().cloned(), &composites).base
    }

    /// lcm of all cofactors.
    pub fn cofactor_lcm(&self) -> BigUint {
        self.cofactor_base().value()
    }

    /// `sum_p max_p * ln p` over the sieved primes.
    pub fn ln_sieved(&self) -> f64 {
        self.max_exponents
            .iter()
            .map(|(&p, &e)| e as f64 * (p as f64).ln())
            .sum()
    }

    /// `ln L_f(N) = sum_p max_p ln p + ln(cofactor lcm)`.
    pub fn ln_lcm(&self) -> f64 {
        self.ln_sieved() + self.cofactor_base().ln()
    }

    /// Exact `L_f(N)`.
    pub fn lcm_value(&self) -> BigUint {
        let sieved: Vec<BigUint> = self
            .max_exponents
            .iter()
            .map(|(&p, &e)| BigUint::from(p).pow(e))
            .collect();
        crate::bigmath::product_tree(sieved) * self.cofactor_lcm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveSettings {
    pub n_max: u64,
    /// Largest sieved prime B.
    pub bound: u64,
    pub segment_size: u64,
    pub seed: u64,
}

impl SieveSettings {
    pub fn new(n_max: u64) -> Self {
        SieveSettings {
            n_max,
            bound: n_max,
            segment_size: DEFAULT_SEGMENT_SIZE,
            seed: DEFAULT_ROOT_SEED,
        }
    }
}

/// Everything the sieve needs for one prime.
#[derive(Clone, Debug)]
pub struct PrimePlan {
    pub prime: u64,
    /// `v_p` of the content of f; added to every `v_p(f(n))`.
    pub content_exp: u32,
    /// Roots of `f / p^content_exp`.
    pub table: RootTable,
}

/// Read-only state shared by all segment workers.
#[derive(Debug)]
pub struct SieveContext {
    poly: IntPolynomial,
    settings: SieveSettings,
    value_bound: BigUint,
    narrow: Option<Vec<i128>>,
    plans: Vec<PrimePlan>,
    truncated: HashSet<u64>,
}

fn valuation_u64(n: &BigUint, p: u64) -> u32 {
    let mut k = 0;
    let mut x = n.clone();
    while !x.is_zero() && (&x % p).is_zero() {
        x /= p;
        k += 1;
    }
    k
}

impl SieveContext {
    pub fn new(poly: &IntPolynomial, settings: SieveSettings) -> Result<Self> {
        Self::build(poly, settings, None)
    }

    /// Like [`SieveContext::new`] but reusing previously computed tables,
    /// ordered by prime.
    pub fn with_tables(
        poly: &IntPolynomial,
        settings: SieveSettings,
        tables: Vec<RootTable>,
    ) -> Result<Self> {
        Self::build(poly, settings, Some(tables))
    }

    fn build(
        poly: &IntPolynomial,
        settings: SieveSettings,
        tables: Option<Vec<RootTable>>,
    ) -> Result<Self> {
        poly.require_degree(1)?;
        if settings.n_max == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if settings.segment_size == 0 {
            return Err(Error::Config("segment size must be at least 1".into()));
        }
        if settings.bound > settings.n_max {
            return Err(Error::Config(format!(
                "sieve bound B = {} exceeds N = {}",
                settings.bound, settings.n_max
            )));
        }
        if let Some(n) = first_integer_zero(poly, settings.n_max) {
            return Err(Error::IntegerZero(n));
        }
        let value_bound = poly.value_bound(settings.n_max);
        let narrow = if value_bound.bits() < 126 {
            poly.coeffs_i128()
        } else {
            None
        };
        let primes = primes_up_to(settings.bound);
        let content = poly.content();
        let ctx = PolyContext::new(poly)?;
        let plans: Vec<PrimePlan> = match tables {
            Some(tables) => {
                if tables.len() != primes.len()
                    || tables.iter().zip(&primes).any(|(t, &p)| t.prime != p)
                {
                    return Err(Error::Config("root tables do not match the prime bound".into()));
                }
                tables
                    .into_iter()
                    .map(|table| PrimePlan {
                        prime: table.prime,
                        content_exp: valuation_u64(&content, table.prime),
                        table,
                    })
                    .collect()
            }
            None => primes
                .par_iter()
                .map(|&p| -> Result<PrimePlan> {
                    let content_exp = valuation_u64(&content, p);
                    let (local, scaled_bound) = if content_exp == 0 {
                        (None, value_bound.clone())
                    } else {
                        let pe = BigUint::from(p).pow(content_exp);
                        let reduced = poly.divide_exact(&BigInt::from(pe.clone()));
                        (Some(PolyContext::new(&reduced)?), &value_bound / pe)
                    };
                    let depth = max_level(p, &scaled_bound).max(1);
                    let table = lift_roots_with(local.as_ref().unwrap_or(&ctx), p, depth, settings.seed)?;
                    Ok(PrimePlan {
                        prime: p,
                        content_exp,
                        table,
                    })
                })
                .collect::<Result<_>>()?,
        };
        let truncated = plans
            .iter()
            .filter(|plan| plan.table.truncated)
            .map(|plan| plan.prime)
            .collect();
        Ok(SieveContext {
            poly: poly.clone(),
            settings,
            value_bound,
            narrow,
            plans,
            truncated,
        })
    }

    pub fn poly(&self) -> &IntPolynomial {
        &self.poly
    }

    pub fn settings(&self) -> &SieveSettings {
        &self.settings
    }

    pub fn value_bound(&self) -> &BigUint {
        &self.value_bound
    }

    pub fn plans(&self) -> &[PrimePlan] {
        &self.plans
    }

    pub fn plan(&self, p: u64) -> Option<&PrimePlan> {
        self.plans
            .binary_search_by_key(&p, |plan| plan.prime)
            .ok()
            .map(|i| &self.plans[i])
    }

    pub fn tables(&self) -> Vec<RootTable> {
        self.plans.iter().map(|plan| plan.table.clone()).collect()
    }

    /// `[lo, hi)` ranges of at most `segment_size` covering `1..=N`.
    pub fn segments(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut lo = 1;
        while lo <= self.settings.n_max {
            let hi = (lo + self.settings.segment_size).min(self.settings.n_max + 1);
            out.push((lo, hi));
            lo = hi;
        }
        out
    }

    /// Factorizations for every `n` in `[lo, hi)`, ascending.
    pub fn factor_segment(&self, lo: u64, hi: u64) -> Vec<FactoredValue> {
        assert!(lo >= 1 && lo <= hi && hi <= self.settings.n_max + 1);
        let len = (hi - lo) as usize;
        let mut marks: Vec<Vec<(u64, u32)>> = vec![Vec::new(); len];
        let (lo_w, hi_w) = (lo as u128, hi as u128);
        for plan in &self.plans {
            let p = plan.prime;
            if plan.content_exp > 0 {
                for m in marks.iter_mut() {
                    m.push((p, plan.content_exp));
                }
            }
            for level in &plan.table.levels {
                let m = level.modulus;
                for &r in &level.roots {
                    let mut n = if r >= lo_w {
                        r
                    } else {
                        r + (lo_w - r).div_ceil(m) * m
                    };
                    while n < hi_w {
                        let slot = &mut marks[(n - lo_w) as usize];
                        match slot.last_mut() {
                            Some((q, e)) if *q == p => *e += 1,
                            _ => slot.push((p, 1)),
                        }
                        n = match n.checked_add(m) {
                            Some(v) => v,
                            None => break,
                        };
                    }
                }
            }
        }
        match &self.narrow {
            Some(coeffs) => self.finish(lo, marks, |n| {
                let x = n as i128;
                coeffs.iter().rev().fold(0i128, |acc, &c| acc * x + c).unsigned_abs()
            }),
            None => self.finish(lo, marks, |n| {
                self.poly.eval_u64(n).magnitude().clone()
            }),
        }
    }

    fn finish<R: Residual>(
        &self,
        lo: u64,
        marks: Vec<Vec<(u64, u32)>>,
        value: impl Fn(u64) -> R,
    ) -> Vec<FactoredValue> {
        let bound = self.settings.bound;
        let square = (bound as u128 + 1) * (bound as u128 + 1);
        marks
            .into_iter()
            .enumerate()
            .map(|(i, mut factors)| {
                let n = lo + i as u64;
                let mut residual = value(n);
                for (p, e) in factors.iter_mut() {
                    for _ in 0..*e {
                        debug_assert_eq!(residual.rem_u64(*p), 0, "p = {p} n = {n}");
                        residual.div_u64(*p);
                    }
                    if !self.truncated.is_empty() && self.truncated.contains(p) {
                        while residual.rem_u64(*p) == 0 {
                            residual.div_u64(*p);
                            *e += 1;
                        }
                    }
                }
                let cofactor = residual.into_big();
                let cofactor_class = if cofactor.is_one() {
                    CofactorClass::Unit
                } else if cofactor.to_u128().is_some_and(|c| c < square) {
                    CofactorClass::Prime
                } else {
                    match classify(&cofactor, self.settings.seed) {
                        Primality::Prime => CofactorClass::Prime,
                        Primality::ProbablePrime => CofactorClass::ProbablePrime,
                        Primality::Composite => CofactorClass::Composite,
                    }
                };
                FactoredValue {
                    n,
                    small_factors: factors,
                    cofactor,
                    cofactor_class,
                }
            })
            .collect()
    }
}

trait Residual {
    fn rem_u64(&self, p: u64) -> u64;
    fn div_u64(&mut self, p: u64);
    fn into_big(self) -> BigUint;
}

impl Residual for u128 {
    fn rem_u64(&self, p: u64) -> u64 {
        (*self % p as u128) as u64
    }
    fn div_u64(&mut self, p: u64) {
        *self /= p as u128;
    }
    fn into_big(self) -> BigUint {
        BigUint::from(self)
    }
}

impl Residual for BigUint {
    fn rem_u64(&self, p: u64) -> u64 {
        (self % p).to_u64().unwrap()
    }
    fn div_u64(&mut self, p: u64) {
        *self /= p;
    }
    fn into_big(self) -> BigUint {
        self
    }
}

/// Lazily factors `1..=N` one segment at a time.
pub struct FactorStream {
    ctx: SieveContext,
    segments: std::vec::IntoIter<(u64, u64)>,
    buffer: std::vec::IntoIter<FactoredValue>,
}

impl FactorStream {
    pub fn context(&self) -> &SieveContext {
        &self.ctx
    }
}

impl Iterator for FactorStream {
    type Item = FactoredValue;

    fn next(&mut self) -> Option<FactoredValue> {
        loop {
            if let Some(v) = self.buffer.next() {
                return Some(v);
            }
            let (lo, hi) = self.segments.next()?;
            self.buffer = self.ctx.factor_segment(lo, hi).into_iter();
        }
    }
}

/// Exact factorization of every `|f(n)|`, `n <= n_max`, over primes up to
/// `bound`.
pub fn sieve_factorizations(
    f: &IntPolynomial,
    n_max: u64,
    bound: u64,
    segment_size: u64,
) -> Result<FactorStream> {
    let settings = SieveSettings {
        n_max,
        bound,
        segment_size,
        seed: DEFAULT_ROOT_SEED,
    };
    let ctx = SieveContext::new(f, settings)?;
    let segments = ctx.segments().into_iter();
    Ok(FactorStream {
        ctx,
        segments,
        buffer: Vec::new().into_iter(),
    })
}

/// Exponent map of `f(1..=n_max)` with `B = N`, folded in parallel.
pub fn exponent_map(f: &IntPolynomial, n_max: u64) -> Result<ExponentMap> {
    let ctx = SieveContext::new(f, SieveSettings::new(n_max))?;
    Ok(exponent_map_with(&ctx, &ctx.segments()))
}

pub fn exponent_map_with(ctx: &SieveContext, segments: &[(u64, u64)]) -> ExponentMap {
    let partials: Vec<ExponentMap> = segments
        .par_iter()
        .map(|&(lo, hi)| {
            let mut map = ExponentMap::default();
            for fv in ctx.factor_segment(lo, hi) {
                map.absorb(&fv);
            }
            map
        })
        .collect();
    let mut total = ExponentMap::default();
    for part in &partials {
        total.merge(part);
    }
    total
}

/// `(N_i, ln L_f(N_i))` for ascending checkpoints.
pub fn lcm_log(f: &IntPolynomial, n_max: u64, checkpoints: &[u64]) -> Result<Vec<(u64, f64)>> {
    let ctx = SieveContext::new(f, SieveSettings::new(n_max))?;
    let mut points: Vec<u64> = checkpoints.iter().copied().filter(|&c| c >= 1 && c <= n_max).collect();
    points.sort_unstable();
    points.dedup();
    let mut total = ExponentMap::default();
    let mut lo = 1;
    let mut out = Vec::with_capacity(points.len());
    for point in points {
        let ranges: Vec<(u64, u64)> = split_range(lo, point + 1, ctx.settings.segment_size);
        total.merge(&exponent_map_with(&ctx, &ranges));
        out.push((point, total.ln_lcm()));
        lo = point + 1;
    }
    Ok(out)
}

pub(crate) fn split_range(lo: u64, hi: u64, size: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = (a + size).min(hi);
        out.push((a, b));
        a = b;
    }
    out
}

/// Slow reference: `lcm(|f(1)|, ..., |f(n_max)|)` by incremental big-integer
/// lcm over the raw values.
pub fn lcm_oracle(f: &IntPolynomial, n_max: u64) -> BigUint {
    let mut acc = BigUint::one();
    for n in 1..=n_max {
        crate::bigmath::lcm_into(&mut acc, f.eval_u64(n).magnitude());
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str) -> IntPolynomial {
        s.parse().unwrap()
    }

    fn factor(f: &str, n: u64, bound: u64) -> FactoredValue {
        let f = poly(f);
        let settings = SieveSettings {
            n_max: n.max(bound),
            bound,
            segment_size: 7,
            seed: 1,
        };
        let ctx = SieveContext::new(&f, settings).unwrap();
        ctx.factor_segment(n, n + 1).pop().unwrap()
    }

    #[test]
    fn factorization_examples() {
        let v = factor("x^2+1", 7, 10);
        assert_eq!(v.small_factors, vec![(2, 1), (5, 2)]);
        assert!(v.cofactor.is_one());
        assert_eq!(v.cofactor_class, CofactorClass::Unit);

        let v = factor("x^2+1", 4, 3);
        assert!(v.small_factors.is_empty());
        assert_eq!(v.cofactor, BigUint::from(17u32));
        assert_eq!(v.cofactor_class, CofactorClass::Prime);

        let v = factor("x^2+1", 1, 10);
        assert_eq!(v.small_factors, vec![(2, 1)]);
        assert!(v.cofactor.is_one());
    }

    #[test]
    fn integer_zero_rejected() {
        let err = sieve_factorizations(&poly("x^2-4"), 10, 10, 4).err().unwrap();
        assert!(matches!(err, Error::IntegerZero(2)));
    }

    #[test]
    fn bound_above_n_rejected() {
        assert!(sieve_factorizations(&poly("x^2+1"), 10, 11, 4).is_err());
    }

    #[test]
    fn content_primes_are_counted() {
        // 12x^2 + 12 = 2^2 * 3 * (x^2+1)
        let values: Vec<FactoredValue> = sieve_factorizations(&poly("12x^2+12"), 30, 30, 8)
            .unwrap()
            .collect();
        for fv in &values {
            assert_eq!(fv.value(), poly("12x^2+12").eval_u64(fv.n).magnitude().clone());
            assert!(fv.exponent_of(3) >= 1);
        }
    }

    #[test]
    fn segment_size_does_not_matter() {
        let f = poly("x^3-x+7");
        let a: Vec<_> = sieve_factorizations(&f, 300, 300, 1).unwrap().collect();
        let b: Vec<_> = sieve_factorizations(&f, 300, 300, 1000).unwrap().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn wide_values_use_big_residuals() {
        // |f(n)| exceeds 2^126 here
        let f = poly("1000000000000000000000000000000000000x^2+1");
        let values: Vec<_> = sieve_factorizations(&f, 50, 50, 16).unwrap().collect();
        for fv in values {
            assert_eq!(fv.value(), f.eval_u64(fv.n).magnitude().clone());
        }
    }

    #[test]
    fn lcm_small() {
        let f = poly("x^2+1");
        assert_eq!(lcm_oracle(&f, 5), BigUint::from(2210u32));
        let map = exponent_map(&f, 5).unwrap();
        assert_eq!(map.lcm_value(), BigUint::from(2210u32));
        let series = lcm_log(&f, 5, &[1, 5]).unwrap();
        assert!((series[0].1 - 2f64.ln()).abs() < 1e-12);
        assert!((series[1].1 - 2210f64.ln()).abs() < 1e-12);
    }
}
