//! Big-integer helpers: logarithms without an arbitrary-precision float
//! library, gcd/lcm that stay fast when one side is huge, and decimal serde.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

/// Natural log of a big integer from its bit length and top 64 bits.
///
/// Relative error is about 2^-52, far below the 1e-9 tolerance used when
/// comparing exponent-map logs with exact lcm values.
pub fn ln_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().unwrap();
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_u128(n: u128) -> f64 {
    if n >> 64 == 0 {
        (n as u64 as f64).ln()
    } else {
        let shift = 64 - n.leading_zeros();
        ((n >> shift) as u64 as f64).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// gcd that reduces the larger operand modulo the smaller first.
pub fn gcd_big(a: &BigUint, b: &BigUint) -> BigUint {
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if small.is_zero() {
        return big.clone();
    }
    let r = big % small;
    if r.is_zero() {
        return small.clone();
    }
    if let (Some(x), Some(y)) = (small.to_u128(), r.to_u128()) {
        return BigUint::from(gcd_u128(x, y));
    }
    small.gcd(&r)
}

pub fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `lcm(acc, v)` computed as `acc * (v / gcd(acc, v))`.
pub fn lcm_into(acc: &mut BigUint, v: &BigUint) {
    if v.is_zero() || acc.is_zero() {
        *acc = BigUint::zero();
        return;
    }
    let g = gcd_big(acc, v);
    *acc *= v / g;
}

pub fn abs_big(v: &BigInt) -> BigUint {
    v.magnitude().clone()
}

/// Product of a list via a balanced tree, which keeps the multiplications
/// near-equal in size.
pub fn product_tree(mut items: Vec<BigUint>) -> BigUint {
    if items.is_empty() {
        return BigUint::from(1u32);
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut iter = items.into_iter();
        while let Some(a) = iter.next() {
            match iter.next() {
                Some(b) => next.push(a * b),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop().unwrap()
}

/// Levels of a product tree, leaves first; `levels.last()` is the root.
pub fn product_levels(items: Vec<BigUint>) -> Vec<Vec<BigUint>> {
    let mut levels = vec![items];
    while levels.last().unwrap().len() > 1 {
        let next = levels
            .last()
            .unwrap()
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => a * b,
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
        levels.push(next);
    }
    levels
}

/// `x mod m` for every modulus, through a remainder tree.
pub fn remainders(x: &BigUint, moduli: Vec<BigUint>) -> Vec<BigUint> {
    if moduli.is_empty() {
        return Vec::new();
    }
    let levels = product_levels(moduli);
    let mut rems = vec![x % &levels.last().unwrap()[0]];
    for level in levels.iter().rev().skip(1) {
        rems = level
            .iter()
            .enumerate()
            .map(|(i, m)| &rems[i / 2] % m)
            .collect();
    }
    rems
}

/// Serde adapter writing a `BigUint` as a decimal string.
pub mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Serde adapter writing a `BigInt` as a decimal string.
pub mod decimal_signed {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}
