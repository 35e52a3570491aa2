//! Sound-but-incomplete irreducibility screen and the integer-zero check.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{discriminant, IntPolynomial};
use crate::error::{Error, Result};
use crate::modp;
use crate::primes::primes_up_to;

const SCREEN_PRIMES: usize = 25;
/// Largest |coefficient| whose divisors the rational-root test enumerates.
const DIVISOR_LIMIT: u64 = 1 << 50;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IrreducibleWitness {
    /// Degree one.
    Linear,
    /// Irreducible modulo a prime dividing neither disc f nor lc f.
    ModPrime(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducibleWitness {
    /// `f(num/den) = 0`, so `den*x - num` divides f.
    RationalRoot {
        #[serde(with = "crate::bigmath::decimal_signed")]
        numerator: BigInt,
        #[serde(with = "crate::bigmath::decimal_signed")]
        denominator: BigInt,
    },
    /// disc f = 0; the witness is the primitive gcd(f, f').
    RepeatedFactor(IntPolynomial),
}

impl ReducibleWitness {
    pub fn factor(&self) -> IntPolynomial {
        match self {
            ReducibleWitness::RationalRoot {
                numerator,
                denominator,
            } => IntPolynomial::new(vec![-numerator.clone(), denominator.clone()]).unwrap(),
            ReducibleWitness::RepeatedFactor(g) => g.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "witness", rename_all = "snake_case")]
pub enum Irreducibility {
    Yes(IrreducibleWitness),
    No(ReducibleWitness),
    Unknown,
}

impl Irreducibility {
    pub fn is_no(&self) -> bool {
        matches!(self, Irreducibility::No(_))
    }
}

impl fmt::Display for Irreducibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Irreducibility::Yes(IrreducibleWitness::Linear) => write!(f, "yes (linear)"),
            Irreducibility::Yes(IrreducibleWitness::ModPrime(p)) => {
                write!(f, "yes (irreducible mod {p})")
            }
            Irreducibility::No(w) => write!(f, "no (factor {})", w.factor()),
            Irreducibility::Unknown => write!(f, "unknown"),
        }
    }
}

/// Returns `yes` or `no` only with a witness; `unknown` when neither the
/// rational-root test nor 25 small primes settle the question.
pub fn irreducibility_screen(f: &IntPolynomial) -> Result<Irreducibility> {
    let d = f.degree();
    if d == 0 {
        return Err(Error::Degree {
            required: 1,
            found: 0,
        });
    }
    if d == 1 {
        return Ok(Irreducibility::Yes(IrreducibleWitness::Linear));
    }
    let disc = discriminant(f)?;
    if disc.is_zero() {
        let g = primitive_gcd(f.coeffs(), &f.derivative());
        return Ok(Irreducibility::No(ReducibleWitness::RepeatedFactor(
            IntPolynomial::new(g).unwrap(),
        )));
    }
    if let Some((numerator, denominator)) = rational_root(f) {
        return Ok(Irreducibility::No(ReducibleWitness::RationalRoot {
            numerator,
            denominator,
        }));
    }
    let lc = f.leading();
    let candidates = primes_up_to(2000)
        .into_iter()
        .filter(|&p| !(lc % p).is_zero())
        .take(SCREEN_PRIMES);
    for p in candidates {
        if (&disc % p).is_zero() {
            continue;
        }
        if modp::is_irreducible(&modp::reduce(f, p), p) {
            return Ok(Irreducibility::Yes(IrreducibleWitness::ModPrime(p)));
        }
    }
    Ok(Irreducibility::Unknown)
}

/// Positive divisors of `n`, or `None` when `n` is too large to factor by
/// trial division.
fn divisors(n: &BigUint) -> Option<Vec<u64>> {
    let n = n.to_u64().filter(|&v| v > 0 && v <= DIVISOR_LIMIT)?;
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let mut rest = n;
    let mut d = 2u64;
    while d * d <= rest {
        if rest % d == 0 {
            let mut e = 0;
            while rest % d == 0 {
                rest /= d;
                e += 1;
            }
            factors.push((d, e));
        }
        d += 1;
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    let mut divs = vec![1u64];
    for (p, e) in factors {
        let current = divs.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            divs.extend(current.iter().map(|v| v * pk));
        }
    }
    divs.sort_unstable();
    Some(divs)
}

/// A rational zero `num/den` in lowest terms with `den > 0`, if one exists
/// and the coefficients are small enough to enumerate candidates.
fn rational_root(f: &IntPolynomial) -> Option<(BigInt, BigInt)> {
    let coeffs = f.coeffs();
    if coeffs[0].is_zero() {
        return Some((BigInt::zero(), BigInt::one()));
    }
    let nums = divisors(coeffs[0].magnitude())?;
    let dens = divisors(f.leading().magnitude())?;
    let d = f.degree() as u32;
    for &q in &dens {
        for &p in &nums {
            if p.gcd(&q) != 1 {
                continue;
            }
            for sign in [1i64, -1] {
                let num = BigInt::from(p) * sign;
                let den = BigInt::from(q);
                // q^d f(p/q) = sum a_i p^i q^(d-i)
                let value: BigInt = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a * num.pow(i as u32) * den.pow(d - i as u32))
                    .sum();
                if value.is_zero() {
                    return Some((num, den));
                }
            }
        }
    }
    None
}

/// True iff `f(n) != 0` for every integer `1 <= n <= n_max`.
///
/// An integer zero `r >= 1` divides the lowest nonzero coefficient and is at
/// most the Cauchy bound `1 + max |a_i / a_d|`, so only those candidates are
/// evaluated.
pub fn certify_no_integer_zero(f: &IntPolynomial, n_max: u64) -> bool {
    first_integer_zero(f, n_max).is_none()
}

pub(crate) fn first_integer_zero(f: &IntPolynomial, n_max: u64) -> Option<u64> {
    if f.degree() == 0 || n_max == 0 {
        return None;
    }
    let lowest = f.coeffs().iter().find(|c| !c.is_zero()).unwrap().abs();
    let lead = f.leading().magnitude();
    let cauchy = f.height() / lead + 2u32;
    let limit = cauchy.to_u64().map_or(n_max, |c| c.min(n_max));
    let check = |r: u64| f.eval_u64(r).is_zero();
    if limit <= 10_000_000 {
        return (1..=limit)
            .filter(|&r| (&lowest % r).is_zero())
            .find(|&r| check(r));
    }
    match divisors(lowest.magnitude()) {
        Some(divs) => divs.into_iter().filter(|&r| r <= limit).find(|&r| check(r)),
        None => (1..=limit)
            .filter(|&r| (&lowest % r).is_zero())
            .find(|&r| check(r)),
    }
}

fn content_of(a: &[BigInt]) -> BigInt {
    a.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn primitive(a: &[BigInt]) -> Vec<BigInt> {
    let c = content_of(a);
    if c.is_zero() {
        return Vec::new();
    }
    let sign = if a.last().is_some_and(|l| l.is_negative()) {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    a.iter().map(|x| x / &c * &sign).collect()
}

fn trimmed(mut a: Vec<BigInt>) -> Vec<BigInt> {
    while a.last().is_some_and(Zero::is_zero) {
        a.pop();
    }
    a
}

fn pseudo_remainder(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r = a.to_vec();
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let lr = r.last().unwrap().clone();
        for c in r.iter_mut() {
            *c *= lb;
        }
        for (j, c) in b.iter().enumerate() {
            r[shift + j] -= &lr * c;
        }
        r = trimmed(r);
    }
    r
}

/// gcd in Z[x] by the primitive remainder sequence, normalized to a positive
/// leading coefficient.
pub fn primitive_gcd(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut x = primitive(&trimmed(a.to_vec()));
    let mut y = primitive(&trimmed(b.to_vec()));
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    while !y.is_empty() {
        let r = primitive(&pseudo_remainder(&x, &y));
        x = y;
        y = r;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(s: &str) -> IntPolynomial {
        s.parse().unwrap()
    }

    #[test]
    fn screen_examples() {
        assert_eq!(
            irreducibility_screen(&poly("x^2+1")).unwrap(),
            Irreducibility::Yes(IrreducibleWitness::ModPrime(3))
        );
        match irreducibility_screen(&poly("x^2-1")).unwrap() {
            Irreducibility::No(w) => {
                let factor = w.factor();
                assert!(factor == poly("x-1") || factor == poly("x+1"), "{factor}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            irreducibility_screen(&poly("x^3-x+7")).unwrap(),
            Irreducibility::Yes(_)
        ));
        assert!(matches!(
            irreducibility_screen(&poly("x^4+x+1")).unwrap(),
            Irreducibility::Yes(IrreducibleWitness::ModPrime(2))
        ));
        assert!(irreducibility_screen(&poly("7")).is_err());
    }

    #[test]
    fn repeated_factor_witness() {
        match irreducibility_screen(&poly("x^3-3x+2")).unwrap() {
            // (x-1)^2 (x+2)
            Irreducibility::No(ReducibleWitness::RepeatedFactor(g)) => assert_eq!(g, poly("x-1")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rational_root_with_denominator() {
        // (2x - 3)(x^2 + 1)
        match irreducibility_screen(&poly("2x^3-3x^2+2x-3")).unwrap() {
            Irreducibility::No(ReducibleWitness::RationalRoot {
                numerator,
                denominator,
            }) => {
                assert_eq!((numerator, denominator), (BigInt::from(3), BigInt::from(2)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn product_of_quadratics_is_never_yes() {
        // x^4 + 1 is reducible mod every prime yet irreducible over Q
        assert_eq!(irreducibility_screen(&poly("x^4+1")).unwrap(), Irreducibility::Unknown);
        // (x^2+1)(x^2+2) has no rational root
        assert!(!matches!(
            irreducibility_screen(&poly("x^4+3x^2+2")).unwrap(),
            Irreducibility::Yes(_)
        ));
    }

    #[test]
    fn integer_zero_examples() {
        assert!(certify_no_integer_zero(&poly("x^2+1"), 1_000_000));
        assert!(!certify_no_integer_zero(&poly("x^2-4"), 10));
        assert_eq!(first_integer_zero(&poly("x^2-4"), 10), Some(2));
        assert!(certify_no_integer_zero(&poly("x^2-4"), 1));
        assert!(certify_no_integer_zero(&poly("x^3-x+7"), 1_000_000));
        assert!(!certify_no_integer_zero(&poly("x^3-1000x^2"), 2000));
        assert!(certify_no_integer_zero(&poly("x^3-1000x^2"), 999));
    }

    fn mul(a: &[i64], b: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    fn nonconstant(max_len: usize) -> impl Strategy<Value = Vec<i64>> {
        (proptest::collection::vec(-20i64..=20, 1..max_len), 1i64..=5)
            .prop_map(|(mut v, lead)| {
                v.push(lead);
                v
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn screen_never_says_yes_for_products(a in nonconstant(3), b in nonconstant(3)) {
            let f = IntPolynomial::from_i64(&mul(&a, &b)).unwrap();
            let verdict = irreducibility_screen(&f).unwrap();
            prop_assert!(!matches!(verdict, Irreducibility::Yes(_)), "{f} -> {verdict:?}");
        }

        #[test]
        fn repeated_linear_factor_has_zero_discriminant(r in -50i64..50, b in nonconstant(3)) {
            let sq = mul(&[-r, 1], &[-r, 1]);
            let f = IntPolynomial::from_i64(&mul(&sq, &b)).unwrap();
            prop_assert!(discriminant(&f).unwrap().is_zero());
        }

        #[test]
        fn shared_root_gives_zero_discriminant(r in -30i64..30, a in nonconstant(2), b in nonconstant(2)) {
            let fa = mul(&a, &[-r, 1]);
            let fb = mul(&b, &[-r, 1]);
            let f = IntPolynomial::from_i64(&mul(&fa, &fb)).unwrap();
            prop_assert!(discriminant(&f).unwrap().is_zero());
        }
    }
}
