//! Exact computation of `L_f(N) = lcm(f(1), ..., f(N))` for integer
//! polynomials, together with the prime-power root counts, per-prime
//! exponents and largest-prime-factor statistics around it.
//!
//! The pipeline is: parse and screen the polynomial ([`poly`]), find and
//! lift its roots modulo prime powers ([`roots`]), factor every `f(n)` with a
//! segmented sieve over the root progressions ([`sieve`]), and fold the
//! factorizations into statistics ([`experiments`], [`run`]).

pub mod alpha;
pub mod bigmath;
pub mod coprime;
pub mod error;
pub mod experiments;
pub(crate) mod modp;
pub mod output;
pub mod plus;
pub mod poly;
pub mod primes;
pub mod roots;
pub mod run;
pub mod sieve;

pub use error::{Error, Result};
pub use poly::{IntPolynomial, Irreducibility};
pub use roots::RootTable;
pub use sieve::{CofactorClass, ExponentMap, FactoredValue};
