//! Fold over the window `N / ln N < n <= N`: the set of n with a large
//! prime factor, the exceptional set, and the threshold counts.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Fraction;
use crate::bigmath::{ln_biguint, ln_u128};
use crate::coprime::settle;
use crate::plus::PlusRecord;
use crate::sieve::{CofactorClass, ExponentMap, FactoredValue};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GranvilleCount {
    pub definite: u64,
    pub indeterminate: u64,
}

/// Mergeable window accumulator.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    pub size: u64,
    pub plus_count: u64,
    pub exceptional: u64,
    /// `sum ln |f(n)|` over the exceptional set.
    pub ln_q: f64,
    /// `gamma_p`: exponent of p in the product over the exceptional set.
    pub gamma: BTreeMap<u64, u64>,
    /// Exact `P^+` values of the large-factor set with their counts.
    #[serde(with = "u128_keys")]
    pub keys: BTreeMap<u128, u64>,
    /// Cofactors whose largest prime is not known exactly.
    #[serde(with = "decimal_list")]
    pub unresolved: Vec<BigUint>,
    pub granville: Vec<GranvilleCount>,
}

mod u128_keys {
    use super::*;

    pub fn serialize<S: Serializer>(m: &BTreeMap<u128, u64>, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<(String, u64)> = m.iter().map(|(k, c)| (k.to_string(), *c)).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u128, u64>, D::Error> {
        Vec::<(String, u64)>::deserialize(d)?
            .into_iter()
            .map(|(k, c)| Ok((k.parse().map_err(serde::de::Error::custom)?, c)))
            .collect()
    }
}

mod decimal_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        Vec::<String>::deserialize(d)?
            .into_iter()
            .map(|x| x.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

impl WindowStats {
    pub fn new(deltas: usize) -> Self {
        WindowStats {
            granville: vec![GranvilleCount::default(); deltas],
            ..Default::default()
        }
    }

    pub fn absorb(&mut self, fv: &FactoredValue, rec: &PlusRecord, deltas: &[f64]) {
        self.size += 1;
        if rec.exceeds_n {
            self.plus_count += 1;
            let exact = match fv.cofactor_class {
                CofactorClass::ProbablePrime => None,
                _ => rec.p_plus.as_ref().and_then(|p| p.to_u128()),
            };
            match exact {
                Some(p) => *self.keys.entry(p).or_insert(0) += 1,
                None => self.unresolved.push(fv.cofactor.clone()),
            }
        } else {
            self.exceptional += 1;
            self.ln_q += ln_biguint(&fv.value());
            for &(p, e) in &fv.small_factors {
                *self.gamma.entry(p).or_insert(0) += e as u64;
            }
        }
        for (count, &delta) in self.granville.iter_mut().zip(deltas) {
            match rec.exceeds_threshold(delta) {
                Some(true) => count.definite += 1,
                Some(false) => {}
                None => count.indeterminate += 1,
            }
        }
    }

    pub fn merge(&mut self, other: &WindowStats) {
        self.size += other.size;
        self.plus_count += other.plus_count;
        self.exceptional += other.exceptional;
        self.ln_q += other.ln_q;
        for (&p, &g) in &other.gamma {
            *self.gamma.entry(p).or_insert(0) += g;
        }
        for (&k, &c) in &other.keys {
            *self.keys.entry(k).or_insert(0) += c;
        }
        self.unresolved.extend(other.unresolved.iter().cloned());
        if self.granville.len() < other.granville.len() {
            self.granville.resize(other.granville.len(), GranvilleCount::default());
        }
        for (a, b) in self.granville.iter_mut().zip(&other.granville) {
            a.definite += b.definite;
            a.indeterminate += b.indeterminate;
        }
    }

    /// Group the large-factor set by largest prime factor.
    ///
    /// Members with an exact `P^+` are keyed by it. A composite cofactor is
    /// keyed by the element of a coprime base of all keys and cofactors that
    /// divides it; when that element is unique, two members share the key
    /// exactly when they share `P^+`. Members with several candidate
    /// elements are counted under each, so the maximum is an upper bound.
    pub fn multiplicity(&self, ln_lcm: f64, n_max: u64) -> MultiplicityReport {
        let members = self.plus_count;
        let window_floor = n_max as f64 / (n_max as f64).ln();
        let groups: Vec<(BigUint, u64, bool)>;
        let mut exact = true;
        if self.unresolved.is_empty() {
            groups = self
                .keys
                .iter()
                .map(|(&k, &c)| (BigUint::from(k), c, true))
                .collect();
        } else {
            let settled = settle(self.keys.keys().map(|&k| BigUint::from(k)), &self.unresolved);
            let mut counts: BTreeMap<BigUint, u64> = self
                .keys
                .iter()
                .map(|(&k, &c)| (BigUint::from(k), c))
                .collect();
            for list in &settled.pieces {
                if list.len() != 1 {
                    exact = false;
                }
                for v in list {
                    *counts.entry(v.clone()).or_insert(0) += 1;
                }
            }
            groups = counts
                .into_iter()
                .map(|(v, c)| {
                    let prime = settled.base.is_prime_element(&v);
                    (v, c, prime)
                })
                .collect();
        }
        let (max_multiplicity, argmax) = groups
            .iter()
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
            .map_or((0, None), |(v, c, _)| (*c, Some(v.to_string())));
        let partition_sum: u64 = groups.iter().map(|g| g.1).sum();
        let distinct = groups.len() as u64;
        // a composite key is a product of primes above N, each above N / ln N
        let ln_primes_lower: f64 = groups
            .iter()
            .map(|(v, _, prime)| {
                if *prime {
                    ln_biguint(v)
                } else {
                    ln_u128(n_max as u128 + 1)
                }
            })
            .sum();
        let ln_keys_upper: f64 = groups.iter().map(|(v, _, _)| ln_biguint(v)).sum();
        MultiplicityReport {
            members,
            max_multiplicity,
            argmax,
            exact,
            distinct_primes: distinct,
            partition_sum,
            ln_primes_lower,
            chain_rhs: distinct as f64 * window_floor.ln(),
            ln_keys_upper,
            ln_lcm,
        }
    }

    pub fn report(
        &self,
        degree: usize,
        n_max: u64,
        map: &ExponentMap,
        deltas: &[f64],
    ) -> WindowReport {
        let ln_q_factored: f64 = self
            .gamma
            .iter()
            .map(|(&p, &g)| g as f64 * (p as f64).ln())
            .sum();
        let ln_alpha_bound: f64 = map
            .alpha
            .iter()
            .map(|(&p, &a)| a as f64 * (p as f64).ln())
            .sum();
        let gamma_le_alpha = self
            .gamma
            .iter()
            .all(|(p, &g)| map.alpha.get(p).is_some_and(|&a| g <= a));
        let ln_n = (n_max as f64).ln();
        let log_ratio = (self.exceptional > 0)
            .then(|| self.ln_q / (degree as f64 * ln_n * self.exceptional as f64));
        let inverse_d2 = 1.0 / (degree * degree) as f64;
        let granville = self
            .granville
            .iter()
            .zip(deltas)
            .map(|(c, &delta)| GranvilleReport {
                delta,
                definite: Fraction::new(c.definite, self.size),
                indeterminate: c.indeterminate,
                total: self.size,
                flagged: delta >= inverse_d2,
            })
            .collect();
        WindowReport {
            n_max,
            window_start: n_max - self.size,
            window_size: self.size,
            plus_count: self.plus_count,
            window_density: Fraction::new(self.plus_count, self.size),
            exceptional: self.exceptional,
            exceptional_fraction: Fraction::new(self.exceptional, n_max),
            ln_q_direct: self.ln_q,
            ln_q_factored,
            ln_alpha_bound,
            log_ratio,
            gamma_le_alpha,
            multiplicity: self.multiplicity(map.ln_lcm(), n_max),
            granville,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityReport {
    /// Size of the large-factor set in the window.
    pub members: u64,
    pub max_multiplicity: u64,
    /// A key attaining the maximum.
    pub argmax: Option<String>,
    /// Every member was assigned a single key.
    pub exact: bool,
    pub distinct_primes: u64,
    pub partition_sum: u64,
    /// Lower bound for the sum of `ln p` over the distinct largest primes.
    pub ln_primes_lower: f64,
    /// `#P ln(N / ln N)`.
    pub chain_rhs: f64,
    /// Sum of `ln` of the keys, an upper bound for the same sum.
    pub ln_keys_upper: f64,
    pub ln_lcm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GranvilleReport {
    pub delta: f64,
    pub definite: Fraction,
    pub indeterminate: u64,
    pub total: u64,
    /// `delta >= 1/d^2`, outside the proven range.
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub n_max: u64,
    pub window_start: u64,
    pub window_size: u64,
    pub plus_count: u64,
    pub window_density: Fraction,
    pub exceptional: u64,
    pub exceptional_fraction: Fraction,
    pub ln_q_direct: f64,
    pub ln_q_factored: f64,
    pub ln_alpha_bound: f64,
    /// `ln Q / (d ln N #E)`, absent when the exceptional set is empty.
    pub log_ratio: Option<f64>,
    pub gamma_le_alpha: bool,
    pub multiplicity: MultiplicityReport,
    pub granville: Vec<GranvilleReport>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(n: u64, small: Vec<(u64, u32)>, cofactor: u64, class: CofactorClass) -> FactoredValue {
        FactoredValue {
            n,
            small_factors: small,
            cofactor: BigUint::from(cofactor),
            cofactor_class: class,
        }
    }

    #[test]
    fn small_composite_cofactors_are_split() {
        // B = N = 10; cofactors 11*13, 13*17 and 11^2
        let mut w = WindowStats::new(0);
        for v in [
            fv(8, vec![], 143, CofactorClass::Composite),
            fv(9, vec![], 221, CofactorClass::Composite),
            fv(10, vec![], 121, CofactorClass::Composite),
        ] {
            let rec = PlusRecord::new(&v, 10);
            w.absorb(&v, &rec, &[]);
        }
        let m = w.multiplicity(0.0, 10);
        assert_eq!(m.members, 3);
        assert!(m.exact);
        assert_eq!(m.max_multiplicity, 1);
        assert_eq!(m.partition_sum, 3);
        assert_eq!(w.keys.keys().copied().collect::<Vec<_>>(), vec![11, 13, 17]);
    }

    #[test]
    fn large_composite_cofactors_group_by_shared_factor() {
        let m = |e: u32| (BigUint::from(1u32) << e) - 1u32;
        let mut w = WindowStats::new(0);
        for (n, c) in [(8, &m(61) * &m(31)), (9, &m(61) * &m(89))] {
            let v = FactoredValue {
                n,
                small_factors: vec![],
                cofactor: c,
                cofactor_class: CofactorClass::Composite,
            };
            let rec = PlusRecord::new(&v, 10);
            w.absorb(&v, &rec, &[]);
        }
        let r = w.multiplicity(0.0, 10);
        assert_eq!(r.members, 2);
        assert!(!r.exact);
        assert_eq!(r.max_multiplicity, 2);
        assert_eq!(r.argmax, Some(m(61).to_string()));
    }

    #[test]
    fn exact_keys_and_merge() {
        let recs = [
            fv(5, vec![(2, 1), (13, 1)], 1, CofactorClass::Unit),
            fv(8, vec![(5, 1), (13, 1)], 1, CofactorClass::Unit),
            fv(7, vec![(2, 1), (5, 2)], 1, CofactorClass::Unit),
        ];
        let mut a = WindowStats::new(1);
        let mut b = WindowStats::new(1);
        for (i, v) in recs.iter().enumerate() {
            let rec = PlusRecord::new(v, 10);
            if i == 0 { &mut a } else { &mut b }.absorb(v, &rec, &[0.1]);
        }
        a.merge(&b);
        assert_eq!(a.size, 3);
        assert_eq!(a.plus_count, 2);
        assert_eq!(a.exceptional, 1);
        assert_eq!(a.gamma, BTreeMap::from([(2, 1), (5, 2)]));
        let m = a.multiplicity(0.0, 10);
        assert!(m.exact);
        assert_eq!(m.max_multiplicity, 2);
        assert_eq!(m.argmax.as_deref(), Some("13"));
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<WindowStats>(&json).unwrap(), a);
    }
}
