use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use polylcm::alpha::alpha_exponents;
use polylcm::experiments::exceptional_set_report;
use polylcm::poly::{certify_no_integer_zero, discriminant, irreducibility_screen, Irreducibility};
use polylcm::primes::primes_up_to;
use polylcm::roots::{lift_roots, rho};
use polylcm::sieve::{exponent_map, exponent_map_with, sieve_factorizations, SieveContext, SieveSettings};
use polylcm::{CofactorClass, IntPolynomial};

fn schoolbook(coeffs: &[i64], n: u64) -> BigInt {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| BigInt::from(c) * BigInt::from(n).pow(i as u32))
        .sum()
}

fn brute_rho(coeffs: &[i64], m: u64) -> usize {
    (0..m)
        .filter(|&x| {
            let v = schoolbook(coeffs, x);
            v.mod_floor(&BigInt::from(m)).is_zero()
        })
        .count()
}

fn poly_coeffs(max_degree: usize, range: i64) -> impl Strategy<Value = Vec<i64>> {
    (1..=max_degree).prop_flat_map(move |d| {
        (
            proptest::collection::vec(-range..=range, d),
            (1..=range).prop_flat_map(|l| prop_oneof![Just(l), Just(-l)]),
        )
            .prop_map(|(mut low, lead)| {
                low.push(lead);
                low
            })
    })
}

fn cubic() -> impl Strategy<Value = Vec<i64>> {
    (proptest::collection::vec(-50i64..=50, 3), 1i64..=50).prop_map(|(mut c, lead)| {
        c.push(lead);
        c
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evaluation_is_exact(coeffs in poly_coeffs(7, 1000), n in 0u64..=1_000_000) {
        let f = IntPolynomial::from_i64(&coeffs).unwrap();
        prop_assert_eq!(f.eval_u64(n), schoolbook(&coeffs, n));
    }

    #[test]
    fn hensel_lifting(coeffs in cubic()) {
        let f = IntPolynomial::from_i64(&coeffs).unwrap();
        prop_assume!(matches!(irreducibility_screen(&f).unwrap(), Irreducibility::Yes(_)));
        let disc = discriminant(&f).unwrap();
        let singular_cap = BigInt::from(3) * &disc * &disc;
        for p in primes_up_to(100) {
            if (f.content() % p).is_zero() {
                continue;
            }
            let table = lift_roots(&f, p, 4).unwrap();
            let lead_divisible = (f.leading() % p).is_zero();
            let regular = !(&disc % p).is_zero() && !lead_divisible;
            let r1 = rho(&f, p, 1).unwrap();
            let mut pk = 1u64;
            for k in 1..=4u32 {
                pk *= p;
                let roots = table.roots(k);
                let m = BigInt::from(pk);
                for &r in roots {
                    prop_assert!(f.eval_mod(&BigInt::from(r), &m).is_zero(), "p = {p}, k = {k}, r = {r}");
                }
                if k > 1 {
                    let below = table.roots(k - 1);
                    let prev = pk / p;
                    for &r in roots {
                        prop_assert!(below.binary_search(&(r % prev as u128)).is_ok());
                    }
                    // every level-(k-1) root with a lift is hit
                    let mut hit: Vec<u128> = roots.iter().map(|&r| r % prev as u128).collect();
                    hit.sort_unstable();
                    hit.dedup();
                    for &b in below {
                        let lifts = (0..p as u128).any(|t| {
                            f.eval_mod(&BigInt::from(b + t * prev as u128), &m).is_zero()
                        });
                        prop_assert_eq!(lifts, hit.binary_search(&b).is_ok());
                    }
                }
                let rk = rho(&f, p, k).unwrap();
                prop_assert_eq!(rk, roots.len());
                if regular {
                    prop_assert_eq!(rk, r1, "p = {}, k = {}", p, k);
                } else if !lead_divisible {
                    prop_assert!(BigInt::from(rk) <= singular_cap);
                }
                if pk <= 100_000 {
                    prop_assert_eq!(rk, brute_rho(&coeffs, pk), "p^k = {}", pk);
                }
            }
        }
    }

    #[test]
    fn sieve_records_are_factorizations(
        coeffs in poly_coeffs(4, 30),
        n_max in 1u64..300,
        bound_frac in 0.05f64..=1.0,
        segment in 1u64..97,
    ) {
        let f = IntPolynomial::from_i64(&coeffs).unwrap();
        prop_assume!(certify_no_integer_zero(&f, n_max));
        let bound = ((n_max as f64 * bound_frac) as u64).max(2).min(n_max.max(2));
        prop_assume!(bound <= n_max);
        let primorial: BigUint = primes_up_to(bound).into_iter().map(BigUint::from).product();
        let stream = sieve_factorizations(&f, n_max, bound, segment).unwrap();
        let mut count = 0;
        for fv in stream {
            count += 1;
            let mut product = fv.cofactor.clone();
            for &(p, e) in &fv.small_factors {
                prop_assert!(p <= bound);
                product *= BigUint::from(p).pow(e);
            }
            prop_assert_eq!(&product, &f.eval_u64(fv.n).magnitude().clone());
            prop_assert!(fv.cofactor.gcd(&primorial).is_one());
            match fv.cofactor_class {
                CofactorClass::Unit => prop_assert!(fv.cofactor.is_one()),
                CofactorClass::Prime => {
                    let c = &fv.cofactor;
                    let mut d = BigUint::from(2u32);
                    while &d * &d <= *c {
                        prop_assert!(!(c % &d).is_zero());
                        d += 1u32;
                    }
                }
                _ => prop_assert!(fv.cofactor > BigUint::from(bound)),
            }
        }
        prop_assert_eq!(count, n_max);
    }

    #[test]
    fn merge_order_is_irrelevant(coeffs in poly_coeffs(3, 20), n_max in 2u64..400, segment in 1u64..64, rot in 0usize..50) {
        let f = IntPolynomial::from_i64(&coeffs).unwrap();
        prop_assume!(certify_no_integer_zero(&f, n_max));
        let settings = SieveSettings { segment_size: segment, ..SieveSettings::new(n_max) };
        let ctx = SieveContext::new(&f, settings).unwrap();
        let mut segs = ctx.segments();
        let forward = exponent_map_with(&ctx, &segs);
        let r = rot % segs.len();
        segs.rotate_left(r);
        segs.reverse();
        let shuffled = exponent_map_with(&ctx, &segs);
        prop_assert_eq!(&forward.max_exponents, &shuffled.max_exponents);
        prop_assert_eq!(&forward.alpha, &shuffled.alpha);
        prop_assert_eq!(forward.lcm_value(), shuffled.lcm_value());
        for (p, &a) in &forward.alpha {
            prop_assert!(a >= u64::from(forward.max_exponents[p]));
        }
        let slow = (1..=n_max).fold(BigUint::one(), |acc, n| acc.lcm(f.eval_u64(n).magnitude()));
        prop_assert_eq!(forward.lcm_value(), slow);
    }

    #[test]
    fn window_events_are_complementary(coeffs in poly_coeffs(3, 20), n_max in 3u64..600) {
        let f = IntPolynomial::from_i64(&coeffs).unwrap();
        prop_assume!(f.degree() >= 2);
        prop_assume!(certify_no_integer_zero(&f, n_max));
        let rep = exceptional_set_report(&f, n_max).unwrap();
        prop_assert_eq!(rep.plus_count + rep.exceptional, rep.window_size);
        prop_assert_eq!(rep.multiplicity.partition_sum, rep.plus_count);
        prop_assert!(rep.gamma_le_alpha);
    }
}

#[test]
fn alpha_two_ways_at_ten_thousand() {
    for s in ["x^2+1", "x^3-x+7", "x^4+x+1"] {
        let f: IntPolynomial = s.parse().unwrap();
        let formula = alpha_exponents(&f, 10_000).unwrap();
        let sieved = exponent_map(&f, 10_000).unwrap().alpha;
        let nonzero: std::collections::BTreeMap<u64, u64> =
            formula.into_iter().filter(|&(_, a)| a > 0).collect();
        assert_eq!(nonzero, sieved, "{s}");
    }
}

#[test]
fn negative_values_use_absolute_value() {
    let f: IntPolynomial = "-x^2-1".parse().unwrap();
    let g: IntPolynomial = "x^2+1".parse().unwrap();
    assert_eq!(exponent_map(&f, 50).unwrap().lcm_value(), exponent_map(&g, 50).unwrap().lcm_value());
    assert!(f.eval_u64(3).is_negative());
}
