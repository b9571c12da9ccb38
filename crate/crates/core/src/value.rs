//! Exact rational utilities.
//!
//! Dominance and optimality are purely order-theoretic, so utilities are kept
//! as exact rationals parsed from decimal strings. No arithmetic is ever
//! performed on them, only comparison.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The utility of a history (or world), an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Utility(Ratio<i64>);

impl Utility {
    pub fn from_int(n: i64) -> Self {
        Utility(Ratio::from_integer(n))
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid decimal utility {0:?}")]
pub struct UtilityParseError(String);

impl FromStr for Utility {
    type Err = UtilityParseError;

    /// Parses a plain decimal string such as `10`, `-3`, or `2.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || UtilityParseError(s.to_owned());
        let (sign, digits) = match s.strip_prefix('-') {
            Some(rest) => (-1i64, rest),
            None => (1i64, s),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let mut numer: i64 = 0;
        for c in int_part.chars().chain(frac_part.chars()) {
            numer = numer
                .checked_mul(10)
                .and_then(|n| n.checked_add((c as u8 - b'0') as i64))
                .ok_or_else(err)?;
        }
        let denom = 10i64.checked_pow(frac_part.len() as u32).ok_or_else(err)?;
        Ok(Utility(Ratio::new(sign * numer, denom)))
    }
}

impl fmt::Display for Utility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for Utility {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Utility {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        // Accept a/b as well so serialized models round-trip.
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.parse().map_err(D::Error::custom)?;
            let d: i64 = d.parse().map_err(D::Error::custom)?;
            if d == 0 {
                return Err(D::Error::custom("zero denominator"));
            }
            return Ok(Utility(Ratio::new(n, d)));
        }
        s.parse().map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        let a: Utility = "2.5".parse().unwrap();
        let b: Utility = "2.50".parse().unwrap();
        assert_eq!(a, b);
        assert!(Utility::from_int(2) < a);
        assert_eq!("10".parse::<Utility>().unwrap(), Utility::from_int(10));
        assert_eq!("-0.5".parse::<Utility>().unwrap().to_string(), "-1/2");
    }

    #[test]
    fn rejects_garbage() {
        assert!("".parse::<Utility>().is_err());
        assert!("1.2.3".parse::<Utility>().is_err());
        assert!("ten".parse::<Utility>().is_err());
    }
}
