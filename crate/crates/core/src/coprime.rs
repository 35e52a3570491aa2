//! Least common multiple of sieve cofactors, kept as a coprime base.
//!
//! Every cofactor is a product of primes above the sieve bound, so the lcm
//! of many of them is stored as pairwise-coprime factors `b` with the
//! largest exponent seen. Inserting a value that shares a factor with
//! existing elements refines the affected elements by gcd splitting. If an
//! element `b` (max exponent `F`) is rewritten as `prod c_i^a_i`, the pieces
//! carry exponent `a_i * F`, so the represented lcm never changes.
//!
//! Merging two bases is insertion of one into the other, which is
//! associative and commutative in the represented value.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bigmath::{gcd_big, ln_biguint, product_tree, remainders};
use crate::primes::{classify, Primality};

const PIECE_SEED: u64 = 0xC0_F4C7;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoprimeBase {
    /// Elements certified (or probably) prime.
    primes: BTreeMap<BigUint, u32>,
    /// Elements not known to be prime.
    others: BTreeMap<BigUint, u32>,
}

/// One element of the base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element<'a> {
    pub value: &'a BigUint,
    pub exponent: u32,
    pub prime: bool,
}

impl CoprimeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.primes.len() + self.others.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Element<'_>> {
        let primes = self.primes.iter().map(|(v, &e)| Element {
            value: v,
            exponent: e,
            prime: true,
        });
        let others = self.others.iter().map(|(v, &e)| Element {
            value: v,
            exponent: e,
            prime: false,
        });
        primes.chain(others)
    }

    pub fn is_prime_element(&self, x: &BigUint) -> bool {
        self.primes.contains_key(x)
    }

    /// lcm the base with `x^e`. `primality` may be passed when already known.
    pub fn insert(&mut self, x: BigUint, e: u32, primality: Option<Primality>) {
        if e == 0 || x <= BigUint::one() {
            return;
        }
        let prime = match primality {
            Some(p) => p != Primality::Composite,
            None => classify(&x, PIECE_SEED) != Primality::Composite,
        };
        if prime {
            if let Some(f) = self.primes.get_mut(&x) {
                *f = (*f).max(e);
                return;
            }
            let hits: Vec<BigUint> = self
                .others
                .keys()
                .filter(|b| (*b % &x).is_zero())
                .cloned()
                .collect();
            if hits.is_empty() {
                self.primes.insert(x, e);
                return;
            }
            let mut items = self.take(hits, false);
            items.push((x, e));
            self.refine(items);
        } else {
            let prime_hits: Vec<BigUint> = self
                .primes
                .keys()
                .filter(|q| (&x % *q).is_zero())
                .cloned()
                .collect();
            let other_hits: Vec<BigUint> = self
                .others
                .keys()
                .filter(|b| !gcd_big(b, &x).is_one())
                .cloned()
                .collect();
            if prime_hits.is_empty() && other_hits.is_empty() {
                self.others.insert(x, e);
                return;
            }
            let mut items = self.take(prime_hits, true);
            items.extend(self.take(other_hits, false));
            items.push((x, e));
            self.refine(items);
        }
    }

    pub fn merge(&mut self, other: &CoprimeBase) {
        for (v, &e) in &other.primes {
            self.insert(v.clone(), e, Some(Primality::Prime));
        }
        for (v, &e) in &other.others {
            self.insert(v.clone(), e, Some(Primality::Composite));
        }
    }

    fn take(&mut self, keys: Vec<BigUint>, prime: bool) -> Vec<(BigUint, u32)> {
        let map = if prime {
            &mut self.primes
        } else {
            &mut self.others
        };
        keys.into_iter()
            .map(|k| {
                let e = map.remove(&k).unwrap();
                (k, e)
            })
            .collect()
    }

    /// Replace `items` (which are coprime to every remaining element) by
    /// their coprime refinement.
    fn refine(&mut self, items: Vec<(BigUint, u32)>) {
        let mut pieces: Vec<BigUint> = items.iter().map(|(v, _)| v.clone()).collect();
        'outer: loop {
            for i in 0..pieces.len() {
                for j in i + 1..pieces.len() {
                    let g = gcd_big(&pieces[i], &pieces[j]);
                    if g.is_one() {
                        continue;
                    }
                    let b = pieces.swap_remove(j);
                    let a = pieces.swap_remove(i);
                    for piece in [&a / &g, &b / &g, g] {
                        if piece > BigUint::one() {
                            pieces.push(piece);
                        }
                    }
                    continue 'outer;
                }
            }
            break;
        }
        for c in pieces {
            let exponent = items
                .iter()
                .map(|(x, e)| e * valuation(x, &c))
                .max()
                .unwrap_or(0);
            debug_assert!(exponent > 0);
            if classify(&c, PIECE_SEED) == Primality::Composite {
                self.others.insert(c, exponent);
            } else {
                self.primes.insert(c, exponent);
            }
        }
    }

    /// Elements sharing a factor with `x`, in iteration order.
    pub fn elements_dividing<'a>(&'a self, x: &BigUint) -> Vec<Element<'a>> {
        if let Some((v, &e)) = self.primes.get_key_value(x) {
            return vec![Element {
                value: v,
                exponent: e,
                prime: true,
            }];
        }
        self.iter()
            .filter(|el| {
                if el.prime {
                    (x % el.value).is_zero()
                } else {
                    !gcd_big(el.value, x).is_one()
                }
            })
            .collect()
    }

    /// Natural log of the represented lcm.
    pub fn ln(&self) -> f64 {
        self.iter()
            .map(|el| el.exponent as f64 * ln_biguint(el.value))
            .sum()
    }

    pub fn value(&self) -> BigUint {
        product_tree(self.iter().map(|el| el.value.pow(el.exponent)).collect())
    }
}

/// A coprime base for `lcm(primes, composites)` together with, for each
/// composite in input order, the elements dividing it.
#[derive(Clone, Debug)]
pub struct Settled {
    pub base: CoprimeBase,
    pub pieces: Vec<Vec<BigUint>>,
}

/// Builds the base in bulk instead of inserting one value at a time.
///
/// `primes` must be distinct primes. A remainder tree over the composites
/// gives `gcd(c, prod primes)` for every composite, and a second one over
/// their squares gives `gcd(c, prod of the other composites)`. When those
/// gcds are 1 or prime the composite splits without further search. The
/// remaining composites share two or more primes with the rest and go
/// through [`CoprimeBase::insert`].
pub fn settle(primes: impl IntoIterator<Item = BigUint>, composites: &[BigUint]) -> Settled {
    let mut base = CoprimeBase::new();
    for q in primes {
        base.primes.insert(q, 1);
    }
    let bump = |map: &mut BTreeMap<BigUint, u32>, key: BigUint, e: u32| {
        let slot = map.entry(key).or_insert(0);
        *slot = (*slot).max(e);
    };
    let mut pieces: Vec<Vec<BigUint>> = vec![Vec::new(); composites.len()];
    let mut fallback: Vec<usize> = Vec::new();
    // strip the known primes
    let mut residual: Vec<(usize, BigUint)> = Vec::new();
    let prime_product = product_tree(base.primes.keys().cloned().collect());
    let rems = if base.primes.is_empty() {
        vec![BigUint::zero(); composites.len()]
    } else {
        remainders(&prime_product, composites.to_vec())
    };
    let mut found: Vec<(BigUint, u32)> = Vec::new();
    for (i, (c, r)) in composites.iter().zip(rems).enumerate() {
        let g = if base.primes.is_empty() { BigUint::one() } else { gcd_big(c, &r) };
        if g.is_one() {
            residual.push((i, c.clone()));
        } else if classify(&g, PIECE_SEED) != Primality::Composite {
            let v = valuation(c, &g);
            let rest = c / g.pow(v);
            pieces[i].push(g.clone());
            found.push((g, v));
            if !rest.is_one() {
                residual.push((i, rest));
            }
        } else {
            fallback.push(i);
        }
    }
    for (g, v) in found {
        bump(&mut base.primes, g, v);
    }
    // shared factors among the residuals
    let mut distinct: Vec<BigUint> = residual.iter().map(|(_, c)| c.clone()).collect();
    distinct.sort();
    distinct.dedup();
    let shared: Vec<BigUint> = if distinct.len() < 2 {
        vec![BigUint::one(); distinct.len()]
    } else {
        let total = product_tree(distinct.clone());
        let squares = distinct.iter().map(|c| c * c).collect();
        remainders(&total, squares)
            .into_iter()
            .zip(&distinct)
            .map(|(r, c)| gcd_big(c, &(r / c)))
            .collect()
    };
    let mut new_primes: BTreeMap<BigUint, u32> = BTreeMap::new();
    for (i, c) in residual {
        let k = distinct.binary_search(&c).unwrap();
        let g = &shared[k];
        let rest = if g.is_one() {
            c
        } else if classify(g, PIECE_SEED) != Primality::Composite {
            let v = valuation(&c, g);
            bump(&mut new_primes, g.clone(), v);
            pieces[i].push(g.clone());
            c / g.pow(v)
        } else {
            fallback.push(i);
            continue;
        };
        if rest.is_one() {
            continue;
        }
        pieces[i].push(rest.clone());
        if classify(&rest, PIECE_SEED) == Primality::Composite {
            bump(&mut base.others, rest, 1);
        } else {
            bump(&mut base.primes, rest, 1);
        }
    }
    for (q, v) in new_primes {
        bump(&mut base.primes, q, v);
    }
    fallback.sort_unstable();
    fallback.dedup();
    for &i in &fallback {
        base.insert(composites[i].clone(), 1, Some(Primality::Composite));
    }
    for (i, list) in pieces.iter_mut().enumerate() {
        let stale = fallback.binary_search(&i).is_ok()
            || list
                .iter()
                .any(|v| !base.primes.contains_key(v) && !base.others.contains_key(v));
        if stale {
            *list = base
                .elements_dividing(&composites[i])
                .into_iter()
                .map(|el| el.value.clone())
                .collect();
        }
    }
    Settled { base, pieces }
}

fn valuation(x: &BigUint, c: &BigUint) -> u32 {
    let mut x = x.clone();
    let mut k = 0;
    loop {
        let (q, r) = x.div_rem(c);
        if !r.is_zero() {
            return k;
        }
        x = q;
        k += 1;
    }
}

#[derive(Serialize, Deserialize)]
struct Repr {
    primes: Vec<(String, u32)>,
    others: Vec<(String, u32)>,
}

impl Serialize for CoprimeBase {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let dump = |m: &BTreeMap<BigUint, u32>| m.iter().map(|(k, &e)| (k.to_string(), e)).collect();
        Repr {
            primes: dump(&self.primes),
            others: dump(&self.others),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoprimeBase {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = Repr::deserialize(d)?;
        let load = |v: Vec<(String, u32)>| -> Result<BTreeMap<BigUint, u32>, D::Error> {
            v.into_iter()
                .map(|(k, e)| {
                    k.parse::<BigUint>()
                        .map(|k| (k, e))
                        .map_err(serde::de::Error::custom)
                })
                .collect()
        };
        Ok(CoprimeBase {
            primes: load(repr.primes)?,
            others: load(repr.others)?,
        })
    }
}
