//! Polynomial text forms.
//!
//! Two inputs parse to the same value: a bracketed coefficient list with the
//! constant term first (`[7, -1, 0, 1]`) and a human form such as `x^3-x+7`,
//! `2x^2 + 3*x - 1` or `-x`. Repeated powers are summed.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::IntPolynomial;
use crate::error::Error;

const MAX_EXPONENT: usize = 4096;

impl FromStr for IntPolynomial {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self, Error> {
        let fail = |reason: &str| Error::Parse {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        if splits_token(input) {
            return Err(fail("whitespace inside a number or term"));
        }
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(fail("empty input"));
        }
        let coeffs = if let Some(inner) = s.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| fail("unterminated coefficient list"))?;
            if inner.is_empty() {
                return Err(fail("empty coefficient list"));
            }
            inner
                .split(',')
                .map(|t| t.parse::<BigInt>().map_err(|_| fail("bad coefficient")))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            parse_terms(&s).map_err(|r| fail(&r))?
        };
        IntPolynomial::new(coeffs).map_err(|e| match e {
            Error::ZeroPolynomial => fail("polynomial is identically zero"),
            other => other,
        })
    }
}

/// True when whitespace separates two pieces that would otherwise fuse,
/// e.g. `x^2 1` or `12 3`.
fn splits_token(input: &str) -> bool {
    let glue = |c: char| c.is_ascii_digit() || c == 'x' || c == '^';
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            let before = chars[..i].iter().rev().find(|c| !c.is_whitespace());
            let after = chars[i..].iter().find(|c| !c.is_whitespace());
            if let (Some(&b), Some(&a)) = (before, after) {
                if (glue(b) && a.is_ascii_digit()) || b == '^' {
                    return true;
                }
            }
        }
        i += 1;
    }
    false
}

fn parse_terms(s: &str) -> Result<Vec<BigInt>, String> {
    let bytes = s.as_bytes();
    let mut coeffs: Vec<BigInt> = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let mut negative = false;
        if bytes[pos] == b'+' || bytes[pos] == b'-' {
            negative = bytes[pos] == b'-';
            pos += 1;
        } else if pos != 0 {
            return Err(format!("expected '+' or '-' at offset {pos}"));
        }
        let digits_start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        let coef = if pos > digits_start {
            Some(s[digits_start..pos].parse::<BigInt>().unwrap())
        } else {
            None
        };
        if pos < bytes.len() && bytes[pos] == b'*' {
            if coef.is_none() {
                return Err(format!("dangling '*' at offset {pos}"));
            }
            pos += 1;
            if pos >= bytes.len() || bytes[pos] != b'x' {
                return Err(format!("expected 'x' after '*' at offset {pos}"));
            }
        }
        let exponent = if pos < bytes.len() && bytes[pos] == b'x' {
            pos += 1;
            if pos < bytes.len() && bytes[pos] == b'^' {
                pos += 1;
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if start == pos {
                    return Err(format!("missing exponent at offset {start}"));
                }
                s[start..pos]
                    .parse::<usize>()
                    .ok()
                    .filter(|&e| e <= MAX_EXPONENT)
                    .ok_or_else(|| format!("exponent too large at offset {start}"))?
            } else {
                1
            }
        } else {
            if coef.is_none() {
                return Err(format!("expected a term at offset {digits_start}"));
            }
            0
        };
        let mut value = coef.unwrap_or_else(BigInt::one);
        if negative {
            value = -value;
        }
        if coeffs.len() <= exponent {
            coeffs.resize(exponent + 1, BigInt::zero());
        }
        coeffs[exponent] += value;
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn coeffs(s: &str) -> Vec<i64> {
        let f: IntPolynomial = s.parse().unwrap();
        f.coeffs().iter().map(|c| c.try_into().unwrap()).collect()
    }

    #[test]
    fn human_forms() {
        assert_eq!(coeffs("x^2+1"), vec![1, 0, 1]);
        assert_eq!(coeffs("x^3-x+7"), vec![7, -1, 0, 1]);
        assert_eq!(coeffs("x^4+x+1"), vec![1, 1, 0, 0, 1]);
        assert_eq!(coeffs("2x^2 + 3*x - 1"), vec![-1, 3, 2]);
        assert_eq!(coeffs("-x"), vec![0, -1]);
        assert_eq!(coeffs("7"), vec![7]);
        assert_eq!(coeffs("x^2+x^2"), vec![0, 0, 2]);
        assert_eq!(coeffs("1+x^2"), vec![1, 0, 1]);
    }

    #[test]
    fn list_form() {
        assert_eq!(coeffs("[7, -1, 0, 1]"), vec![7, -1, 0, 1]);
        assert_eq!(coeffs("[1,0,1,0]"), vec![1, 0, 1]);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "x^", "x^2+", "2**x", "*x", "y^2", "[1,2", "[]", "x-x", "x^2 1", "[0,0]"] {
            assert!(bad.parse::<IntPolynomial>().is_err(), "{bad:?} should fail");
        }
    }

    proptest! {
        #[test]
        fn display_round_trips(cs in proptest::collection::vec(-1000i64..1000, 1..8)) {
            prop_assume!(cs.iter().any(|&c| c != 0));
            let f = IntPolynomial::from_i64(&cs).unwrap();
            let text: IntPolynomial = f.to_string().parse().unwrap();
            let list: IntPolynomial = f.to_coeff_list().parse().unwrap();
            prop_assert_eq!(&text, &f);
            prop_assert_eq!(&list, &f);
        }
    }
}
