//! Small exact-arithmetic helpers shared by the modules.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::Rational;

pub(crate) fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub(crate) fn factorial_int(n: u64) -> BigInt {
    BigInt::from(factorial(n))
}

/// `n (n-1) ... (n-k+1)`, zero when `k > n`.
pub(crate) fn falling_factorial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    (n - k + 1..=n).fold(BigUint::one(), |acc, j| acc * j)
}

/// Falling factorial of a possibly negative integer: `x (x-1) ... (x-k+1)`.
pub(crate) fn falling_factorial_signed(x: i64, k: u64) -> BigInt {
    (0..k as i64).fold(BigInt::one(), |acc, j| acc * (x - j))
}

pub(crate) fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

pub(crate) fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn pow2(e: u32) -> BigInt {
    BigInt::one() << e as usize
}

/// Parses the textual form `p/q` or `p` (optionally signed, surrounding
/// whitespace ignored).
pub(crate) fn parse_rational(text: &str) -> Result<Rational> {
    let trimmed = text.trim();
    let err = |reason: &str| Error::Parse {
        what: "rational",
        input: text.to_string(),
        reason: reason.to_string(),
    };
    let (num, den) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err("bad numerator"))?;
    let den: BigInt = den.parse().map_err(|_| err("bad denominator"))?;
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// Integer power of a rational, exponent may be negative.
pub(crate) fn rat_pow(base: &Rational, exp: i32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp.unsigned_abs() {
        acc *= base;
    }
    if exp < 0 {
        acc.recip()
    } else {
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("7/8").unwrap(), rat(7, 8));
        assert_eq!(parse_rational(" -1/24\n").unwrap(), rat(-1, 24));
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn falling() {
        assert_eq!(falling_factorial(5, 2), BigUint::from(20u32));
        assert_eq!(falling_factorial(2, 3), BigUint::zero());
        assert_eq!(falling_factorial_signed(-1, 2), BigInt::from(2));
        assert_eq!(binomial(6, 3), BigUint::from(20u32));
    }
}
