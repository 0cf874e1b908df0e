//! Exact rationals and their `"p/q"` text form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational { Rational::from_integer(BigInt::from(n)) }

pub fn ratio(n: i64, d: i64) -> Rational { Rational::new(BigInt::from(n), BigInt::from(d)) }

pub fn zero() -> Rational { Rational::zero() }

pub fn one() -> Rational { Rational::one() }

/// Parses `"p/q"` or `"p"`. Whitespace around the literal is ignored.
pub fn parse_rational(s: &str) -> Result<Rational> {
  s.trim().parse::<Rational>().map_err(|e| Error::Schema(format!("bad rational `{s}`: {e}")))
}

/// `"p/q"`, with `q` omitted when it is 1. `Ratio` keeps itself reduced with a positive
/// denominator, so this is canonical.
pub fn format_rational(r: &Rational) -> String { r.to_string() }

pub mod serde_str {
  use serde::{Deserialize, Deserializer, Serializer};

  use super::Rational;

  pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&super::format_rational(r))
  }

  pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    let s = String::deserialize(d)?;
    super::parse_rational(&s).map_err(serde::de::Error::custom)
  }
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn text_form() {
    assert_eq!(format_rational(&ratio(6, -4)), "-3/2");
    assert_eq!(format_rational(&int(5)), "5");
    assert_eq!(parse_rational(" -3/2 ").unwrap(), ratio(-3, 2));
    assert_eq!(parse_rational("4/2").unwrap(), int(2));
    assert!(parse_rational("1/0").is_err());
    assert!(parse_rational("x").is_err());
  }
}
