//! Exact rational scalars.
//!
//! Every coefficient in the crate is a [`Rational`]; there is no floating point anywhere.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub use num_rational::BigRational as Rational;

/// Shorthand for the rational `num / den`.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integer-valued rational.
pub fn qi(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"-p/q"` or a bare integer.
pub fn parse_rational(src: &str) -> Result<Rational> {
    let s = src.trim();
    let bad = || Error::Parse {
        offset: 0,
        message: format!("invalid rational literal `{src}`"),
    };
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Canonical `"p/q"` text (integers print without a denominator).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Generalized binomial coefficient `top (top-1) ... (top-bottom+1) / bottom!`.
pub fn gbinom(top: &Rational, bottom: u32) -> Rational {
    let mut acc = Rational::one();
    for j in 0..bottom {
        acc *= top - qi(j as i64);
        acc /= qi(j as i64 + 1);
    }
    acc
}

/// `Some(n)` when `r` is an integer.
pub fn as_integer(r: &Rational) -> Option<BigInt> {
    r.is_integer().then(|| r.to_integer())
}

/// `(-1)^e` as a rational sign.
pub fn sign(odd: bool) -> Rational {
    if odd {
        -Rational::one()
    } else {
        Rational::one()
    }
}

/// Least common multiple of the denominators in `values`.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}
