use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::primes::{primes_up_to, smallest_prime_factors};

/// `ln lcm(1..N)` computed per prime and `psi(N)` computed per integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiBaseline {
    pub n: u64,
    /// `sum_{p <= N} floor(log_p N) ln p`.
    pub ln_lcm: f64,
    /// `sum_{n <= N} Lambda(n)`.
    pub psi: f64,
    pub ratio: f64,
    /// Both routes produced the same exponent of every prime.
    pub exact_match: bool,
}

pub fn psi_baseline(n_max: u64) -> PsiBaseline {
    let mut by_prime: BTreeMap<u64, u32> = BTreeMap::new();
    for p in primes_up_to(n_max) {
        let mut k = 0;
        let mut pk = 1u64;
        while let Some(next) = pk.checked_mul(p).filter(|&v| v <= n_max) {
            pk = next;
            k += 1;
        }
        by_prime.insert(p, k);
    }
    let spf = smallest_prime_factors(n_max);
    let mut by_integer: BTreeMap<u64, u32> = BTreeMap::new();
    let mut psi = 0.0;
    for n in 2..=n_max {
        let p = spf[n as usize] as u64;
        let mut m = n;
        while m % p == 0 {
            m /= p;
        }
        if m == 1 {
            *by_integer.entry(p).or_insert(0) += 1;
            psi += (p as f64).ln();
        }
    }
    let ln_lcm = by_prime
        .iter()
        .map(|(&p, &k)| k as f64 * (p as f64).ln())
        .sum();
    PsiBaseline {
        n: n_max,
        ln_lcm,
        psi,
        ratio: if n_max == 0 { 0.0 } else { psi / n_max as f64 },
        exact_match: by_prime == by_integer,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        let b = psi_baseline(10);
        assert!(b.exact_match);
        assert!((b.ln_lcm - 2520f64.ln()).abs() < 1e-12);
        assert!((b.psi - 2520f64.ln()).abs() < 1e-12);
        let b = psi_baseline(2);
        assert!((b.psi - 2f64.ln()).abs() < 1e-15);
        assert_eq!(psi_baseline(1).psi, 0.0);
    }
}
