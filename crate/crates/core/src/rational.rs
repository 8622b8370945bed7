//! Exact rational helpers.
//!
//! Probabilities are held as `BigRational` so that equality of marginals is
//! decided exactly. Floating views are derived on demand.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn ratio(numer: i64, denom: i64) -> Rational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

/// Parses `"3/8"`, `"2"` or `"-1/4"`. Decimal notation is rejected.
pub fn parse_fraction(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::InvalidArgument(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

/// Parses a decimal literal such as `"0.05"`, `"-1.25e-3"` exactly.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("not a decimal: {s:?}"));
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{whole}{frac}0").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32 - 1;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(digits);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -value } else { value })
}

/// Accepts either a fraction or a decimal.
pub fn parse_any(s: &str) -> Result<Rational> {
    if looks_decimal(s) {
        parse_decimal(s)
    } else {
        parse_fraction(s)
    }
}

pub fn looks_decimal(s: &str) -> bool {
    s.contains(['.', 'e', 'E'])
}

/// Interprets a float radius by its shortest round-trip decimal form, so
/// `0.05` means exactly 1/20.
pub fn decimal_of_f64(x: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite value {x}")));
    }
    parse_decimal(&format!("{x}"))
}

/// Renders `n/d`, or `n` when the denominator is one.
pub fn format(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn sum<'a>(it: impl IntoIterator<Item = &'a Rational>) -> Rational {
    it.into_iter().fold(Rational::zero(), |acc, x| acc + x)
}

/// Exact `base^exp` for a nonnegative integer exponent.
pub fn pow(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_and_decimals() {
        assert_eq!(parse_fraction("3/8").unwrap(), ratio(3, 8));
        assert_eq!(parse_fraction(" 6/16 ").unwrap(), ratio(3, 8));
        assert_eq!(parse_fraction("2").unwrap(), int(2));
        assert!(parse_fraction("1/0").is_err());
        assert!(parse_fraction("0.5").is_err());
        assert_eq!(parse_decimal("0.05").unwrap(), ratio(1, 20));
        assert_eq!(parse_decimal("-1.25e-3").unwrap(), ratio(-1, 800));
        assert_eq!(parse_decimal("3").unwrap(), int(3));
        assert_eq!(parse_decimal(".5").unwrap(), ratio(1, 2));
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal("abc").is_err());
    }

    #[test]
    fn float_radius_is_its_decimal() {
        assert_eq!(decimal_of_f64(0.02).unwrap(), ratio(1, 50));
        assert_eq!(decimal_of_f64(1e-9).unwrap(), ratio(1, 1_000_000_000));
        assert!(decimal_of_f64(f64::NAN).is_err());
    }

    #[test]
    fn formatting() {
        assert_eq!(format(&ratio(6, 16)), "3/8");
        assert_eq!(format(&int(1)), "1");
    }
}
