//! Integer polynomials: exact evaluation, discriminant, and the
//! irreducibility / no-integer-zero preconditions.

mod parse;
mod resultant;
mod screen;

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use resultant::{determinant, discriminant, resultant};
pub use screen::{
    certify_no_integer_zero, irreducibility_screen, primitive_gcd, Irreducibility,
    IrreducibleWitness, ReducibleWitness,
};
pub(crate) use screen::first_integer_zero;

/// Polynomial with arbitrary-precision integer coefficients.
///
/// `coeffs[i]` is the coefficient of `x^i`; the last stored coefficient is
/// never zero and the zero polynomial cannot be constructed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Result<Self> {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(IntPolynomial { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &BigInt {
        self.coeffs.last().unwrap()
    }

    pub fn constant(&self) -> &BigInt {
        &self.coeffs[0]
    }

    pub fn require_degree(&self, required: usize) -> Result<()> {
        if self.degree() < required {
            return Err(Error::Degree {
                required,
                found: self.degree(),
            });
        }
        Ok(())
    }

    /// Exact value `f(n)`, sign included.
    pub fn evaluate(&self, n: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * n + c;
        }
        acc
    }

    pub fn eval_u64(&self, n: u64) -> BigInt {
        self.evaluate(&BigInt::from(n))
    }

    /// `f(r) mod m` for a non-negative residue, result in `[0, m)`.
    pub fn eval_mod(&self, r: &BigInt, m: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = (acc * r + c).mod_floor(m);
        }
        acc
    }

    pub fn derivative(&self) -> Vec<BigInt> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigInt::from(i))
            .collect()
    }

    /// gcd of the coefficients, always positive.
    pub fn content(&self) -> BigUint {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
            .magnitude()
            .clone()
    }

    /// Largest absolute coefficient.
    pub fn height(&self) -> BigUint {
        self.coeffs
            .iter()
            .map(|c| c.magnitude().clone())
            .max()
            .unwrap()
    }

    /// Upper bound `sum |c_i| n_max^i` for `|f(n)|` on `[0, n_max]`.
    pub fn value_bound(&self, n_max: u64) -> BigUint {
        let n = BigUint::from(n_max);
        let mut acc = BigUint::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * &n + c.magnitude();
        }
        acc
    }

    /// `f / p^e` where `p^e` exactly divides every coefficient.
    pub(crate) fn divide_exact(&self, divisor: &BigInt) -> IntPolynomial {
        IntPolynomial {
            coeffs: self.coeffs.iter().map(|c| c / divisor).collect(),
        }
    }

    /// Coefficients as `i128` if every one fits.
    pub(crate) fn coeffs_i128(&self) -> Option<Vec<i128>> {
        self.coeffs.iter().map(ToPrimitive::to_i128).collect()
    }

    /// Bracketed coefficient list, constant term first: `[7, -1, 0, 1]`.
    pub fn to_coeff_list(&self) -> String {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        format!("[{}]", parts.join(", "))
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = c.sign() == Sign::Minus;
            if first {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { "-" } else { "+" })?;
            }
            first = false;
            let mag = c.abs();
            if e == 0 {
                write!(f, "{mag}")?;
                continue;
            }
            if !mag.is_one() {
                write!(f, "{mag}")?;
            }
            if e == 1 {
                f.write_str("x")?;
            } else {
                write!(f, "x^{e}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for IntPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IntPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
