//! Exact rational arithmetic.
//!
//! Rationals are arbitrary-precision and always kept in lowest terms with a
//! positive denominator (the backing type maintains that invariant on every
//! operation). Parsing and printing use the `-? digits (/ digits)?` form;
//! integers print without a denominator.

use crate::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number.
pub type Rational = BigRational;

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational `n/d`. Panics if `d == 0`; callers pass literal denominators.
pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parse the textual form `-? digits (/ digits)?`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::Domain(format!("malformed rational `{text}`"));
    let (sign, rest) = match text.strip_prefix('-') {
        Some(r) => (-1i64, r),
        None => (1, text),
    };
    if rest.is_empty() {
        return Err(bad());
    }
    let (num_s, den_s) = match rest.split_once('/') {
        Some((n, d)) => (n, d),
        None => (rest, "1"),
    };
    if num_s.is_empty()
        || den_s.is_empty()
        || !num_s.bytes().all(|b| b.is_ascii_digit())
        || !den_s.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let num: BigInt = num_s.parse().map_err(|_| bad())?;
    let den: BigInt = den_s.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Domain(format!("zero denominator in `{text}`")));
    }
    Ok(BigRational::new(num * BigInt::from(sign), den))
}

/// Print in the same form `parse_rational` accepts.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `q^k` for a non-negative integer exponent.
pub fn pow_nat(q: &Rational, k: u32) -> Rational {
    q.pow(k as i32)
}

/// `1/n` for a positive integer level.
pub fn one_over(n: u32) -> Rational {
    rat(1, n as i64)
}

/// True when `q` is an integer.
pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

/// Extract a positive integer, if `q` is one.
pub fn as_positive_int(q: &Rational) -> Option<u32> {
    if is_integer(q) && q.is_positive() {
        q.numer().to_u32()
    } else {
        None
    }
}

/// Extract a non-negative integer, if `q` is one.
pub fn as_nonneg_int(q: &Rational) -> Option<u64> {
    if is_integer(q) && !q.is_negative() {
        q.numer().to_u64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print_round_trip() {
        for text in ["0", "1", "-1", "1/2", "-5/4", "25/12", "7"] {
            let q = parse_rational(text).unwrap();
            assert_eq!(format_rational(&q), text);
        }
    }

    #[test]
    fn parse_normalizes_to_lowest_terms() {
        assert_eq!(format_rational(&parse_rational("4/8").unwrap()), "1/2");
        assert_eq!(format_rational(&parse_rational("-6/4").unwrap()), "-3/2");
        assert_eq!(format_rational(&parse_rational("0/7").unwrap()), "0");
    }

    #[test]
    fn parse_rejects_garbage() {
        for text in ["", "-", "1/", "/2", "1/0", "a", "1.5", "+3", "1/-2"] {
            assert!(parse_rational(text).is_err(), "accepted `{text}`");
        }
    }

    #[test]
    fn arithmetic_is_exact() {
        let q = rat(1, 3) + rat(1, 6);
        assert_eq!(q, rat(1, 2));
        assert_eq!(pow_nat(&rat(3, 2), 3), rat(27, 8));
    }

    #[test]
    fn integer_extraction() {
        assert_eq!(as_positive_int(&rat_int(4)), Some(4));
        assert_eq!(as_positive_int(&rat(1, 2)), None);
        assert_eq!(as_positive_int(&rat_int(0)), None);
        assert_eq!(as_nonneg_int(&rat_int(0)), Some(0));
    }
}
